#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "kaslib/cli.hpp"
#include "kaslib/datasets.hpp"

using namespace kas;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path linear_csv(const std::string& name, Index n) {
  const fs::path dir = testutil::temp_dir(name);
  GradientDataset ds;
  ds.spec = InputSpec::uniform_cube(2, -1.0, 1.0);
  ds.X = sample_inputs(ds.spec, n, 3);
  Vector a(2);
  a << 2.0, -1.0;
  ds.Y = ds.X * a;
  for (Index i = 0; i < n; ++i) ds.dY.push_back(a.transpose());
  write_dataset(ds, DatasetPaths::in_directory(dir));
  return dir;
}

std::vector<std::string> dataset_flags(const fs::path& dir) {
  return {"--inputs", (dir / "inputs.csv").string(), "--outputs", (dir / "outputs.csv").string(),
          "--gradients", (dir / "gradients.csv").string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit then predict on a 10-sample linear dataset") {
  const fs::path dir = linear_csv("cli_linear", 10);
  const fs::path out = dir / "out";
  const Run fit = run(concat({"fit", "--method", "as", "--r", "1", "--out-dir", out.string()}, dataset_flags(dir)));
  REQUIRE_MESSAGE(fit.code == 0, fit.err);
  CHECK(fs::exists(out / "surrogate.json"));

  const Run pred = run({"predict", "--inputs", (dir / "inputs.csv").string(), "--out-dir", out.string()});
  REQUIRE_MESSAGE(pred.code == 0, pred.err);
  const Matrix p = read_csv_matrix(out / "predictions.csv", true);
  const Matrix y = read_csv_matrix(dir / "outputs.csv", true);
  REQUIRE(p.rows() == 10);
  REQUIRE(p.cols() == 2);
  CHECK((p.col(0) - y.col(0)).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(p.col(1).minCoeff() >= 0.0);
  std::ifstream header(out / "predictions.csv");
  std::string line;
  std::getline(header, line);
  CHECK(line == "mean,variance");
}

TEST_CASE("predict with mismatched input dimension exits 2") {
  const fs::path dir = linear_csv("cli_mismatch", 10);
  const fs::path out = dir / "out";
  REQUIRE(run(concat({"fit", "--method", "as", "--out-dir", out.string()}, dataset_flags(dir))).code == 0);
  std::ofstream(dir / "wide.csv") << "x1,x2,x3\n0.1,0.2,0.3\n";
  const Run pred = run({"predict", "--inputs", (dir / "wide.csv").string(), "--out-dir", out.string()});
  CHECK(pred.code == kExitUsage);
  CHECK_FALSE(pred.err.empty());
}

TEST_CASE("predict without a surrogate exits 2") {
  const fs::path dir = linear_csv("cli_missing", 4);
  const Run pred = run({"predict", "--inputs", (dir / "inputs.csv").string(), "--out-dir", (dir / "none").string()});
  CHECK(pred.code == kExitUsage);
}

TEST_CASE("schema errors exit 2") {
  const fs::path dir = linear_csv("cli_schema", 6);
  std::ofstream(dir / "outputs.csv") << "y1\n1\n2\n";
  const Run fit = run(concat({"fit", "--method", "as", "--out-dir", (dir / "out").string()}, dataset_flags(dir)));
  CHECK(fit.code == kExitUsage);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"run-benchmark", "--name", "naca", "--out-dir", testutil::temp_dir("cli_naca").string()}).code ==
        kExitUsage);
  CHECK(run({"fit", "--method", "pca"}).code == kExitUsage);
}

TEST_CASE("tune with a single-point grid") {
  const fs::path dir = linear_csv("cli_tune", 30);
  const fs::path out = dir / "out";
  const std::vector<std::string> args =
      concat({"tune", "--features", "20", "--measure", "gaussian", "--grid-min", "0.1", "--grid-max", "0.1",
              "--grid-points", "1", "--folds", "2", "--seed", "5", "--out-dir", out.string()},
             dataset_flags(dir));
  const Run tune = run(args);
  REQUIRE_MESSAGE(tune.code == 0, tune.err);
  const auto report = nlohmann::json::parse(slurp(out / "tune_report.json"));
  CHECK(report["points"].size() == 1);
  const std::string first = slurp(out / "tune_report.json");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(out / "tune_report.json") == first);
}

TEST_CASE("generate writes train and test sets") {
  const fs::path out = testutil::temp_dir("cli_generate");
  const Run gen = run({"generate", "--name", "sine", "--train", "12", "--test", "5", "--seed", "2", "--out-dir",
                       out.string()});
  REQUIRE_MESSAGE(gen.code == 0, gen.err);
  CHECK(read_csv_matrix(out / "train" / "inputs.csv", true).rows() == 12);
  CHECK(read_csv_matrix(out / "test" / "outputs.csv", true).rows() == 5);
}

}  // TEST_SUITE
