#include "kaslib/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <spdlog/spdlog.h>

#include "kaslib/benchmarks.hpp"
#include "kaslib/error.hpp"
#include "kaslib/json_util.hpp"
#include "kaslib/pipeline.hpp"
#include "kaslib/random.hpp"

namespace fs = std::filesystem;

namespace kas {

namespace {

struct RunConfig {
  std::string name;
  std::string inputs, outputs, gradients, metric;
  std::string surrogate, featuremap;
  std::string method = "kas";
  std::vector<int> rs;
  Index features = 1000;
  std::optional<double> sigma_f;
  std::string measure = "gaussian";
  double grid_min = 1e-3;
  double grid_max = 1e2;
  int grid_points = 12;
  int folds = 5;
  double tol = 0.8;
  Index train = 500;
  Index test = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
};

void add_dataset_flags(CLI::App* cmd, RunConfig& c, bool required) {
  auto* in = cmd->add_option("--inputs", c.inputs, "inputs.csv (x1..xm, normalized)");
  auto* outp = cmd->add_option("--outputs", c.outputs, "outputs.csv (y1..yd)");
  auto* grad = cmd->add_option("--gradients", c.gradients, "gradients.csv (g_a_b)");
  if (required) {
    in->required();
    outp->required();
    grad->required();
  }
  cmd->add_option("--metric", c.metric, "headerless d x d output metric");
}

void add_tuning_flags(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--features", c.features, "feature space dimension D")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-f", c.sigma_f, "feature amplitude (default: std of the outputs)");
  cmd->add_option("--measure", c.measure, "spectral measure")
      ->check(CLI::IsMember({"gaussian", "mvn-diag", "laplace", "beta"}));
  cmd->add_option("--grid-min", c.grid_min, "smallest grid value");
  cmd->add_option("--grid-max", c.grid_max, "largest grid value");
  cmd->add_option("--grid-points", c.grid_points, "grid values per hyperparameter");
  cmd->add_option("--folds", c.folds, "cross-validation folds");
  cmd->add_option("--tol", c.tol, "early-stopping tolerance");
}

void add_common_flags(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--seed", c.seed, "seed for all randomness");
  cmd->add_option("--threads", c.threads, "worker threads (0: available parallelism)");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
}

GradientDataset load_dataset(const RunConfig& c) {
  DatasetPaths p{c.inputs, c.outputs, c.gradients, std::nullopt};
  if (!c.metric.empty()) p.metric = c.metric;
  return read_dataset(p);
}

MeasureTemplate measure_template(const RunConfig& c) {
  MeasureTemplate t;
  t.family = parse_measure_family(c.measure);
  return t;
}

TuneConfig tune_config(const RunConfig& c, const GradientDataset& ds) {
  TuneConfig cfg;
  cfg.grid = default_grid(parse_measure_family(c.measure), c.grid_points, c.grid_min, c.grid_max);
  cfg.folds = c.folds;
  cfg.tol = c.tol;
  cfg.features = c.features;
  cfg.r = c.rs.empty() ? 1 : c.rs.front();
  cfg.sigma_f = c.sigma_f;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  if (cfg.features <= ds.input_dim()) {
    throw ArgumentError("--features must exceed the input dimension " + std::to_string(ds.input_dim()));
  }
  return cfg;
}

fs::path out_path(const RunConfig& c, const std::string& file) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / file;
}

std::string plot_file(Method m, int r) {
  std::string name = method_name(m);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return "summary_plot_" + name + "_r" + std::to_string(r) + ".csv";
}

int cmd_generate(const RunConfig& c, std::ostream& out) {
  const Benchmark bench = make_benchmark(c.name, c.seed);
  auto write = [&](Index samples, std::uint64_t stream, const std::string& sub) {
    GradientDataset ds = generate_dataset(bench, samples, derive_seed(c.seed, stream));
    ds.X = normalize(ds.X, ds.spec);
    const fs::path dir = fs::path(c.out_dir) / sub;
    fs::create_directories(dir);
    write_dataset(ds, DatasetPaths::in_directory(dir, ds.metric.has_value()));
    out << "wrote " << samples << " samples to " << dir.string() << "\n";
  };
  write(c.train, 1, "train");
  if (c.test > 0) write(c.test, 2, "test");
  return kExitOk;
}

int cmd_run_benchmark(const RunConfig& c, std::ostream& out) {
  const Benchmark bench = make_benchmark(c.name, c.seed);
  const GradientDataset ds = generate_dataset(bench, c.train, derive_seed(c.seed, 1));
  std::optional<GradientDataset> test;
  if (c.test > 0) test = generate_dataset(bench, c.test, derive_seed(c.seed, 2));
  const std::vector<int> rs = c.rs.empty() ? std::vector<int>{1} : c.rs;
  RunConfig cc = c;
  cc.rs = rs;
  const TuneConfig cfg = tune_config(cc, ds);

  ComparisonReport report = compare(ds, cfg, measure_template(c), rs, test);
  report.benchmark = c.name;
  write_json_file(out_path(c, "report.json"), to_json(report));
  write_text_file(out_path(c, "report.csv"), to_csv(report));

  const GradientDataset& shown = test ? *test : ds;
  for (const auto& cell : report.cells) {
    if (!cell.available || cell.r != 1) continue;
    std::optional<FeatureMap> fm;
    if (cell.method == Method::kas) fm = report.tuning.best->feature_map;
    const Surrogate s = fit_surrogate(ds, cell.method, 1, fm, cfg.gp);
    write_text_file(out_path(c, plot_file(cell.method, 1)), to_csv(summary_plot_data(s, shown.X, shown.Y)));
  }
  for (const auto& cell : report.cells) {
    out << method_name(cell.method) << " r=" << cell.r << ": ";
    if (cell.available) {
      out << "RRMSE " << cell.mean << " +/- " << cell.std;
      if (cell.test_rrmse) out << " (test " << *cell.test_rrmse << ")";
    } else {
      out << "unavailable (" << cell.reason << ")";
    }
    out << "\n";
  }
  return kExitOk;
}

int cmd_tune(const RunConfig& c, std::ostream& out) {
  const GradientDataset ds = load_dataset(c);
  const TuneReport report = grid_search(ds, tune_config(c, ds), measure_template(c));
  write_json_file(out_path(c, "tune_report.json"), to_json(report));
  if (!report.best) {
    out << "no grid point reached a mean score below 1; no feature map written\n";
    return kExitOk;
  }
  write_json_file(out_path(c, "featuremap.json"), to_json(report.best->feature_map));
  out << "best mean RRMSE " << report.best->mean_score << " at grid point " << report.best->index << "\n";
  return kExitOk;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  const GradientDataset ds = load_dataset(c);
  const Method method = parse_method(c.method);
  const int r = c.rs.empty() ? 1 : c.rs.front();
  std::optional<FeatureMap> fm;
  if (method == Method::kas) {
    if (!c.featuremap.empty()) {
      fm = feature_map_from_json(read_json_file(c.featuremap));
    } else {
      const TuneReport report = grid_search(ds, tune_config(c, ds), measure_template(c));
      if (!report.best) throw FitError("tuning found no feature map with mean score below 1");
      fm = report.best->feature_map;
    }
  }
  const Surrogate s = fit_surrogate(ds, method, r, fm);
  write_json_file(out_path(c, "surrogate.json"), to_json(s));
  if (fm) write_json_file(out_path(c, "featuremap.json"), to_json(*fm));
  out << "fitted " << method_name(method) << " surrogate with r=" << r << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
  const fs::path path = c.surrogate.empty() ? fs::path(c.out_dir) / "surrogate.json" : fs::path(c.surrogate);
  if (!fs::exists(path)) throw SchemaError("surrogate file " + path.string() + " does not exist");
  const Surrogate s = surrogate_from_json(read_json_file(path));
  const Matrix x = read_csv_matrix(c.inputs, true);
  if (x.rows() > 0 && x.cols() != s.input_dim()) {
    throw SchemaError(c.inputs + ": has " + std::to_string(x.cols()) + " columns, the surrogate expects " +
                      std::to_string(s.input_dim()));
  }
  const GpBatchPrediction pred = predict(s, x.rows() > 0 ? x : Matrix(0, s.input_dim()));
  const Index d = pred.means.cols();
  Matrix table(pred.means.rows(), d + 1);
  table << pred.means, pred.variances;
  std::vector<std::string> header;
  for (Index j = 0; j < d; ++j) header.push_back(d == 1 ? "mean" : "mean_" + std::to_string(j + 1));
  header.push_back("variance");
  write_csv_matrix(out_path(c, "predictions.csv"), table, header);
  out << "wrote " << table.rows() << " predictions\n";
  return kExitOk;
}

int cmd_compare(const RunConfig& c, std::ostream& out) {
  const GradientDataset ds = load_dataset(c);
  const std::vector<int> rs = c.rs.empty() ? std::vector<int>{1} : c.rs;
  RunConfig cc = c;
  cc.rs = rs;
  const ComparisonReport report = compare(ds, tune_config(cc, ds), measure_template(c), rs);
  write_json_file(out_path(c, "report.json"), to_json(report));
  write_text_file(out_path(c, "report.csv"), to_csv(report));
  out << to_csv(report);
  return kExitOk;
}

}  // namespace

void configure_logging_from_env() {
  const char* level = std::getenv("KASLIB_LOG");
  const std::string v = level ? level : "error";
  if (v == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (v == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active subspaces and kernel-based active subspaces"};
  app.require_subcommand(1);
  RunConfig c;

  auto* gen = app.add_subcommand("generate", "sample a benchmark into CSV files (train/ and test/)");
  gen->add_option("--name", c.name, "benchmark name")->required();
  gen->add_option("--train", c.train, "training samples");
  gen->add_option("--test", c.test, "test samples");
  add_common_flags(gen, c);

  auto* bench = app.add_subcommand("run-benchmark", "tune and compare AS and KAS on a benchmark");
  bench->add_option("--name", c.name, "benchmark name")->required();
  bench->add_option("--train", c.train, "training samples");
  bench->add_option("--test", c.test, "held-out test samples");
  bench->add_option("--r", c.rs, "active dimensions (repeatable)");
  add_tuning_flags(bench, c);
  add_common_flags(bench, c);

  auto* tune = app.add_subcommand("tune", "grid-search the feature map on a CSV dataset");
  add_dataset_flags(tune, c, true);
  tune->add_option("--r", c.rs, "active dimension");
  add_tuning_flags(tune, c);
  add_common_flags(tune, c);

  auto* fit = app.add_subcommand("fit", "fit a surrogate on a CSV dataset");
  add_dataset_flags(fit, c, true);
  fit->add_option("--method", c.method, "as or kas")->check(CLI::IsMember({"as", "kas"}));
  fit->add_option("--r", c.rs, "active dimension");
  fit->add_option("--featuremap", c.featuremap, "tuned featuremap.json (KAS; tunes when absent)");
  add_tuning_flags(fit, c);
  add_common_flags(fit, c);

  auto* pred = app.add_subcommand("predict", "evaluate a stored surrogate");
  pred->add_option("--surrogate", c.surrogate, "surrogate.json (default: <out-dir>/surrogate.json)");
  pred->add_option("--inputs", c.inputs, "inputs.csv")->required();
  add_common_flags(pred, c);

  auto* cmp = app.add_subcommand("compare", "tune and compare AS and KAS on a CSV dataset");
  add_dataset_flags(cmp, c, true);
  cmp->add_option("--r", c.rs, "active dimensions (repeatable)");
  add_tuning_flags(cmp, c);
  add_common_flags(cmp, c);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(c, out);
    if (*bench) return cmd_run_benchmark(c, out);
    if (*tune) return cmd_tune(c, out);
    if (*fit) return cmd_fit(c, out);
    if (*pred) return cmd_predict(c, out);
    if (*cmp) return cmd_compare(c, out);
  } catch (const FactorizationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularityError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const FitError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace kas
