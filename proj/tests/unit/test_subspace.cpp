#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kaslib/benchmarks.hpp"
#include "kaslib/error.hpp"
#include "kaslib/subspace.hpp"

using namespace kas;

namespace {

// Dataset on [-1, 1]^m with f(x) = a . x.
GradientDataset linear_dataset(const Vector& a, Index samples, std::uint64_t seed) {
  GradientDataset ds;
  ds.spec = InputSpec::uniform_cube(a.size(), -1.0, 1.0);
  ds.X = sample_inputs(ds.spec, samples, seed);
  ds.Y = ds.X * a;
  for (Index i = 0; i < samples; ++i) ds.dY.push_back(a.transpose());
  return ds;
}

bool is_symmetric_psd(const Matrix& h) {
  if (h != h.transpose()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("subspace") {

TEST_CASE("covariance examples") {
  Matrix g1(1, 2), g2(1, 2);
  g1 << 1, 0;
  g2 << 0, 1;
  const std::vector<Matrix> a{g1, g2};
  CHECK((covariance(a, Matrix::Identity(1, 1)) - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-15);

  Matrix g(1, 2);
  g << 3, 4;
  Matrix expect(2, 2);
  expect << 9, 12, 12, 16;
  for (int m : {1, 3, 10}) {
    const std::vector<Matrix> c(static_cast<std::size_t>(m), g);
    CHECK((covariance(c, Matrix::Identity(1, 1)) - expect).norm() < 1e-12);
  }

  const std::vector<Matrix> z(4, Matrix::Zero(2, 3));
  CHECK(covariance(z, Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariance with a metric matches the direct sum") {
  const Matrix r0 = testutil::gaussian_matrix(3, 3, 1);
  const Matrix r = r0 * r0.transpose() + Matrix::Identity(3, 3);
  std::vector<Matrix> jacs;
  Matrix direct = Matrix::Zero(4, 4);
  for (std::uint64_t s = 0; s < 7; ++s) {
    jacs.push_back(testutil::gaussian_matrix(3, 4, 10 + s));
    direct += jacs.back().transpose() * r * jacs.back();
  }
  direct /= 7.0;
  const Matrix h = covariance(jacs, r);
  CHECK((h - direct).norm() <= 1e-12 * direct.norm());
  CHECK(is_symmetric_psd(h));
}

TEST_CASE("covariance dimension mismatch") {
  const std::vector<Matrix> a{Matrix::Ones(1, 2), Matrix::Ones(1, 3)};
  CHECK_THROWS_AS(covariance(a, Matrix::Identity(1, 1)), DimensionError);
  const std::vector<Matrix> b{Matrix::Ones(2, 2)};
  CHECK_THROWS_AS(covariance(b, Matrix::Identity(1, 1)), DimensionError);
}

TEST_CASE("active subspace of a linear function") {
  Vector a(2);
  a << 3, 4;
  const SubspaceResult res = active_subspace(linear_dataset(a, 25, 1), 1);
  CHECK(res.kind == SubspaceKind::as);
  CHECK(res.eigvals[0] == doctest::Approx(25.0));
  CHECK(res.eigvals[1] <= 1e-10 * 25.0);
  CHECK(res.W1(0, 0) == doctest::Approx(0.6));
  CHECK(res.W1(1, 0) == doctest::Approx(0.8));

  Matrix x(1, 2);
  x << 1, 1;
  CHECK(project(res, x)(0, 0) == doctest::Approx(1.4));
}

TEST_CASE("linear function has a single nonzero eigenvalue for any sample size") {
  Vector a(6);
  a << 1, -2, 0.5, 3, 0, 1;
  for (Index n : {1, 3, 40}) {
    const SubspaceResult res = active_subspace(linear_dataset(a, n, 7), 1);
    for (Index i = 1; i < 6; ++i) CHECK(res.eigvals[i] <= 1e-10 * res.eigvals[0]);
    CHECK(projector_distance(res.W1, a) <= 1e-8);
  }
}

TEST_CASE("paraboloid has no dominant gap") {
  const GradientDataset ds = generate_dataset(make_benchmark("paraboloid"), 500, 3);
  const SubspaceResult res = active_subspace(ds, 1);
  CHECK(res.eigvals[0] / res.eigvals[7] <= 3.0);
}

TEST_CASE("active_subspace shapes and argument checks") {
  const GradientDataset ds = generate_dataset(make_benchmark("paraboloid"), 30, 3);
  const SubspaceResult res = active_subspace(ds, 7);
  CHECK(res.W1.cols() == 7);
  CHECK(res.W2.cols() == 1);
  CHECK((res.W1.transpose() * res.W1 - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((res.W1.transpose() * res.W2).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(active_subspace(ds, 0), ArgumentError);
  CHECK_THROWS_AS(active_subspace(ds, 8), ArgumentError);
}

TEST_CASE("eigenvalue sum equals the trace") {
  const GradientDataset ds = generate_dataset(make_benchmark("ebola"), 100, 5);
  const SubspaceResult res = active_subspace(ds, 2);
  std::vector<Matrix> jacs(ds.dY.begin(), ds.dY.end());
  const double trace = covariance(jacs, Matrix::Identity(1, 1)).trace();
  CHECK(std::abs(res.eigvals.sum() - trace) <= 1e-8 * trace);
  for (Index i = 0; i < res.eigvals.size(); ++i) CHECK(res.eigvals[i] >= -1e-10 * res.eigvals[0]);
}

TEST_CASE("rotational equivariance") {
  const GradientDataset ds = generate_dataset(make_benchmark("ebola"), 200, 6);
  const Matrix q = testutil::random_orthogonal(8, 77);
  GradientDataset rot = ds;
  rot.spec = InputSpec::standard_normal(8);
  rot.X = normalize(ds.X, ds.spec) * q.transpose();
  for (auto& g : rot.dY) g = g * q.transpose();
  const SubspaceResult a = active_subspace(ds, 2);
  const SubspaceResult b = active_subspace(rot, 2);
  CHECK((a.eigvals - b.eigvals).cwiseAbs().maxCoeff() <= 1e-10 * a.eigvals[0]);
  CHECK(projector_distance(q.transpose() * b.W1, a.W1) <= 1e-6);
}

TEST_CASE("doubling the metric doubles the eigenvalues") {
  GradientDataset ds = generate_dataset(make_benchmark("vec-quadratic", 2), 80, 2);
  const SubspaceResult a = active_subspace(ds, 2);
  ds.metric = 2.0 * *ds.metric;
  const SubspaceResult b = active_subspace(ds, 2);
  CHECK((b.eigvals - 2.0 * a.eigvals).cwiseAbs().maxCoeff() <= 1e-12 * b.eigvals[0]);
  CHECK(projector_distance(a.W1, b.W1) <= 1e-10);
}

TEST_CASE("kernel active subspace basics") {
  const FeatureMap fm = FeatureMap::random_fourier(2, 40, 1.0, GaussianMeasure{1.0}, 3);
  GradientDataset zero = linear_dataset(Vector::Zero(2), 10, 1);
  const SubspaceResult z = kernel_active_subspace(zero, fm, 1);
  CHECK(z.kind == SubspaceKind::kas);
  CHECK(z.eigvals.size() == 40);
  CHECK(z.eigvals.cwiseAbs().maxCoeff() == 0.0);

  Vector a(2);
  a << 0.3, -1.2;
  const SubspaceResult one = kernel_active_subspace(linear_dataset(a, 1, 2), fm, 2);
  CHECK(one.eigvals[1] <= 1e-10 * one.eigvals[0]);
  CHECK(one.feature_map.has_value());
  CHECK((one.W1.transpose() * one.W1 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("kernel active subspace covariance is symmetric PSD with trace equal to eigen-sum") {
  const GradientDataset ds = generate_dataset(make_benchmark("vec-quadratic", 1), 30, 4);
  const FeatureMap fm = FeatureMap::random_fourier(10, 60, 1.0, GaussianMeasure{0.5}, 5);
  const Matrix xn = normalize(ds.X, ds.spec);
  std::vector<Matrix> lifted;
  for (Index i = 0; i < ds.size(); ++i) lifted.push_back(fm.lift_gradient(xn.row(i).transpose(), ds.dY[static_cast<std::size_t>(i)]));
  const Matrix h = covariance(lifted, *ds.metric);
  CHECK(is_symmetric_psd(h));
  const SubspaceResult res = kernel_active_subspace(ds, fm, 3);
  CHECK(std::abs(res.eigvals.sum() - h.trace()) <= 1e-8 * h.trace());
}

TEST_CASE("kernel active subspace r bounds and singular lifts") {
  const GradientDataset ds = linear_dataset(Vector::Ones(2), 5, 1);
  const FeatureMap fm = FeatureMap::random_fourier(2, 10, 1.0, GaussianMeasure{1.0}, 3);
  CHECK_THROWS_AS(kernel_active_subspace(ds, fm, 10), ArgumentError);
  CHECK_THROWS_AS(kernel_active_subspace(ds, fm, 0), ArgumentError);
  const FeatureMap flat = FeatureMap::from_parts(FeatureVariant::rff, Matrix::Zero(10, 2), Vector::Zero(10), 1.0,
                                                 1.0, 1.0, GaussianMeasure{}, 0);
  try {
    (void)kernel_active_subspace(ds, flat, 1);
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
}

TEST_CASE("project examples") {
  SubspaceResult res;
  res.kind = SubspaceKind::as;
  res.r = 1;
  res.W1 = Matrix::Zero(3, 1);
  res.W1(0, 0) = 1.0;
  const Matrix x = testutil::gaussian_matrix(4, 3, 2);
  CHECK(project(res, x) == x.col(0));

  const FeatureMap flat = FeatureMap::from_parts(FeatureVariant::rff, Matrix::Zero(5, 3), Vector::Constant(5, 0.3),
                                                 1.0, 1.0, 1.0, GaussianMeasure{}, 0);
  SubspaceResult k;
  k.kind = SubspaceKind::kas;
  k.r = 1;
  k.W1 = Matrix::Ones(5, 1) / std::sqrt(5.0);
  k.feature_map = flat;
  const Matrix p = project(k, x);
  for (Index i = 1; i < 4; ++i) CHECK(p(i, 0) == p(0, 0));

  k.feature_map.reset();
  CHECK_THROWS_AS(project(k, x), StateError);
}

TEST_CASE("eigenvalue gaps and projector distance") {
  SubspaceResult res;
  res.eigvals = Vector(3);
  res.eigvals << 4, 2, 0;
  const auto gaps = eigenvalue_gaps(res);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0] == doctest::Approx(2.0));
  CHECK(std::isinf(gaps[1]));

  Matrix a(2, 1), b(2, 1);
  a << 1, 0;
  b << 0, 1;
  CHECK(projector_distance(a, b) == doctest::Approx(1.0));
  CHECK(projector_distance(a, 3.0 * a) <= 1e-15);
}

TEST_CASE("JSON round trip") {
  const GradientDataset ds = generate_dataset(make_benchmark("sine"), 20, 1);
  const FeatureMap fm = FeatureMap::random_fourier(2, 12, 1.0, LaplaceMeasure{0.0, 1.0}, 3);
  for (const SubspaceResult& res : {active_subspace(ds, 1), kernel_active_subspace(ds, fm, 2)}) {
    const SubspaceResult back = subspace_from_json(nlohmann::json::parse(to_json(res).dump()));
    CHECK(back.kind == res.kind);
    CHECK(back.r == res.r);
    CHECK(back.eigvals == res.eigvals);
    CHECK(back.W1 == res.W1);
    CHECK(back.W2 == res.W2);
    CHECK(back.feature_map.has_value() == res.feature_map.has_value());
    const Matrix x = normalize(ds.X, ds.spec);
    CHECK(project(back, x) == project(res, x));
  }
  CHECK_THROWS_AS(subspace_from_json(nlohmann::json::object()), SchemaError);
}

}  // TEST_SUITE
