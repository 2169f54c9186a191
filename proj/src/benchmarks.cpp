#include "kaslib/benchmarks.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <sstream>

#include "kaslib/error.hpp"
#include "kaslib/random.hpp"

namespace kas {

namespace {

void require_dim(const Vector& x, Index m, const char* what) {
  if (x.size() != m) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(m) + " inputs, got " +
                         std::to_string(x.size()));
  }
}

constexpr std::array<double, 8> kEbolaLower{0.1, 0.1, 0.05, 0.41, 0.0276, 0.081, 0.25, 0.0833};
constexpr std::array<double, 8> kEbolaUpper{0.4, 0.4, 0.2, 1.0, 0.1702, 0.21, 0.5, 0.7};
const std::array<const char*, 8> kEbolaNames{"beta1", "beta2", "beta3", "rho1",
                                             "gamma1", "gamma2", "omega", "psi"};

double ebola_unchecked(const Vector& p) {
  const double num = p[0] + p[1] * p[3] * p[4] / p[6] + p[2] / p[5] * p[7];
  return num / (p[4] + p[7]);
}

Vector ebola_gradient_unchecked(const Vector& p) {
  const double b1 = p[0], b2 = p[1], b3 = p[2], r1 = p[3];
  const double g1 = p[4], g2 = p[5], om = p[6], psi = p[7];
  const double num = b1 + b2 * r1 * g1 / om + b3 / g2 * psi;
  const double den = g1 + psi;
  const double r0 = num / den;
  Vector g(8);
  g[0] = 1.0 / den;
  g[1] = r1 * g1 / om / den;
  g[2] = psi / g2 / den;
  g[3] = b2 * g1 / om / den;
  g[4] = (b2 * r1 / om) / den - r0 / den;
  g[5] = -b3 * psi / (g2 * g2) / den;
  g[6] = -b2 * r1 * g1 / (om * om) / den;
  g[7] = (b3 / g2) / den - r0 / den;
  return g;
}

void check_ebola_range(const Vector& p) {
  require_dim(p, 8, "ebola_r0");
  for (Index i = 0; i < 8; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(p[i] >= kEbolaLower[k] && p[i] <= kEbolaUpper[k])) {
      std::ostringstream msg;
      msg << "ebola_r0: " << kEbolaNames[k] << " = " << p[i] << " outside [" << kEbolaLower[k] << ", "
          << kEbolaUpper[k] << "]";
      throw RangeError(msg.str());
    }
  }
}

Matrix seeded_spd(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix b(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) b(i, j) = normal(rng);
  }
  Matrix a = Matrix::Zero(n, n);
  a.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  a.diagonal().array() += 1.0;
  return a;
}

}  // namespace

double paraboloid(const Vector& x) { return 0.5 * x.squaredNorm(); }
Vector paraboloid_gradient(const Vector& x) { return x; }

double sine_revolution(const Vector& x) { return std::sin(x.squaredNorm()); }
Vector sine_revolution_gradient(const Vector& x) { return 2.0 * std::cos(x.squaredNorm()) * x; }

double ebola_r0(const Vector& p) {
  check_ebola_range(p);
  return ebola_unchecked(p);
}

Vector ebola_r0_gradient(const Vector& p) {
  check_ebola_range(p);
  return ebola_gradient_unchecked(p);
}

InputSpec ebola_spec() {
  InputSpec spec = InputSpec::uniform_box(std::vector<double>(kEbolaLower.begin(), kEbolaLower.end()),
                                          std::vector<double>(kEbolaUpper.begin(), kEbolaUpper.end()));
  spec.names.assign(kEbolaNames.begin(), kEbolaNames.end());
  return spec;
}

// ---------------------------------------------------------------------------

VecQuadratic::VecQuadratic(Index input_dim, Index output_dim, std::uint64_t seed) {
  if (input_dim < 1 || output_dim < 1) throw ArgumentError("vec_quadratic: dimensions must be positive");
  Rng rng = make_rng(seed);
  for (Index j = 0; j < output_dim; ++j) forms_.push_back(seeded_spd(input_dim, rng));
}

VecQuadratic::VecQuadratic(std::vector<Matrix> forms) : forms_(std::move(forms)) {
  if (forms_.empty()) throw ArgumentError("vec_quadratic: need at least one form");
  for (const Matrix& a : forms_) {
    if (a.rows() != a.cols() || a.rows() != forms_.front().rows()) {
      throw DimensionError("vec_quadratic: forms must be square and equally sized");
    }
  }
}

Vector VecQuadratic::operator()(const Vector& x) const {
  require_dim(x, input_dim(), "vec_quadratic");
  Vector f(output_dim());
  for (Index j = 0; j < output_dim(); ++j) f[j] = 0.5 * x.dot(forms_[static_cast<std::size_t>(j)] * x);
  return f;
}

Matrix VecQuadratic::jacobian(const Vector& x) const {
  require_dim(x, input_dim(), "vec_quadratic");
  Matrix jac(output_dim(), input_dim());
  for (Index j = 0; j < output_dim(); ++j) jac.row(j) = (forms_[static_cast<std::size_t>(j)] * x).transpose();
  return jac;
}

// ---------------------------------------------------------------------------

std::vector<std::string> benchmark_names() { return {"paraboloid", "sine", "ebola", "vec-quadratic"}; }

Benchmark make_benchmark(const std::string& name, std::uint64_t seed) {
  Benchmark b;
  b.name = name;
  if (name == "paraboloid") {
    b.spec = InputSpec::uniform_cube(8, -1.0, 1.0);
    b.eval = [](const Vector& x) { return Vector::Constant(1, paraboloid(x)); };
    b.jacobian = [](const Vector& x) { return Matrix(paraboloid_gradient(x).transpose()); };
  } else if (name == "sine") {
    b.spec = InputSpec::uniform_cube(2, -3.0, 3.0);
    b.eval = [](const Vector& x) { return Vector::Constant(1, sine_revolution(x)); };
    b.jacobian = [](const Vector& x) { return Matrix(sine_revolution_gradient(x).transpose()); };
  } else if (name == "ebola") {
    b.spec = ebola_spec();
    b.eval = [](const Vector& x) { return Vector::Constant(1, ebola_unchecked(x)); };
    b.jacobian = [](const Vector& x) { return Matrix(ebola_gradient_unchecked(x).transpose()); };
  } else if (name == "vec-quadratic") {
    auto model = std::make_shared<const VecQuadratic>(10, 6, seed);
    b.spec = InputSpec::uniform_cube(10, -1.0, 1.0);
    b.output_dim = model->output_dim();
    b.eval = [model](const Vector& x) { return (*model)(x); };
    b.jacobian = [model](const Vector& x) { return model->jacobian(x); };
    Rng rng = make_rng(derive_seed(seed, 1));
    b.metric = seeded_spd(model->output_dim(), rng);
  } else {
    throw ArgumentError("unknown benchmark '" + name + "'");
  }
  return b;
}

GradientDataset generate_dataset(const Benchmark& bench, Index samples, std::uint64_t seed) {
  GradientDataset ds;
  ds.spec = bench.spec;
  ds.X = sample_inputs(bench.spec, samples, seed);
  ds.Y.resize(samples, bench.output_dim);
  ds.dY.reserve(static_cast<std::size_t>(samples));
  const Vector scale = normalization_scale(bench.spec);
  for (Index i = 0; i < samples; ++i) {
    const Vector x = ds.X.row(i).transpose();
    ds.Y.row(i) = bench.eval(x).transpose();
    ds.dY.push_back(bench.jacobian(x) * scale.asDiagonal());
  }
  ds.metric = bench.metric;
  ds.validate();
  return ds;
}

Vector mc_profile_draws(const Benchmark& bench, const SubspaceResult& res, const Vector& x, Index samples,
                        std::uint64_t seed) {
  if (res.kind != SubspaceKind::as) {
    throw UnsupportedError("mc_profile: KAS subspaces have no linear projector in input space");
  }
  if (samples < 1) throw ArgumentError("mc_profile: need at least one draw");
  const Index m = bench.spec.dim();
  if (res.W1.rows() != m) throw DimensionError("mc_profile: subspace dimension differs from benchmark inputs");
  require_dim(x, m, "mc_profile");
  if (bench.output_dim != 1) throw UnsupportedError("mc_profile: scalar benchmarks only");

  const Matrix p = res.projector();
  const Matrix complement = Matrix::Identity(m, m) - p;
  const Vector active = p * normalize(Matrix(x.transpose()), bench.spec).row(0).transpose();
  const Matrix draws = normalize(sample_inputs(bench.spec, samples, seed), bench.spec);
  const Matrix points = denormalize((draws * complement.transpose()).rowwise() + active.transpose(), bench.spec);
  Vector values(samples);
  for (Index i = 0; i < samples; ++i) values[i] = bench.eval(points.row(i).transpose())[0];
  return values;
}

double mc_profile(const Benchmark& bench, const SubspaceResult& res, const Vector& x, Index samples,
                  std::uint64_t seed) {
  return mc_profile_draws(bench, res, x, samples, seed).mean();
}

}  // namespace kas
