#include "kaslib/featuremap.hpp"

#include <cmath>
#include <numbers>

#include "kaslib/error.hpp"
#include "kaslib/json_util.hpp"
#include "kaslib/random.hpp"

namespace kas {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// log of a Gamma(shape, 1) draw; stays finite for tiny shapes where the
// direct draw underflows to zero.
double log_gamma_draw(Rng& rng, double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  while (u <= 0.0) u = unit(rng);
  return std::log(g(rng)) + std::log(u) / shape;
}

double draw_beta(Rng& rng, double a, double b) {
  const double lx = log_gamma_draw(rng, a);
  const double ly = log_gamma_draw(rng, b);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

double draw_laplace(Rng& rng, double location, double scale) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  double u = unit(rng);
  while (std::abs(u) >= 0.5) u = unit(rng);
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return location - scale * sign * std::log1p(-2.0 * std::abs(u));
}

Matrix sample_projection(const SpectralMeasure& measure, Index rows, Index cols, Rng& rng) {
  Matrix w(rows, cols);
  // Row-major fill: row i is the i-th frequency vector.
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      w(i, j) = std::visit(
          overloaded{
              [&](const GaussianMeasure& g) {
                std::normal_distribution<double> n(0.0, std::sqrt(g.variance));
                return n(rng);
              },
              [&](const MvnDiagMeasure& g) {
                std::normal_distribution<double> n(0.0, std::sqrt(g.variances[static_cast<std::size_t>(j)]));
                return n(rng);
              },
              [&](const LaplaceMeasure& l) { return draw_laplace(rng, l.location, l.scale); },
              [&](const BetaMeasure& b) { return draw_beta(rng, b.alpha, b.beta); },
          },
          measure);
    }
  }
  return w;
}

void require_dims(Index input_dim, Index features) {
  if (input_dim < 1) throw ArgumentError("feature map: input dimension must be positive");
  if (features <= input_dim) {
    throw ArgumentError("feature map: feature dimension D=" + std::to_string(features) +
                        " must exceed input dimension m=" + std::to_string(input_dim));
  }
}

}  // namespace

void validate_measure(const SpectralMeasure& measure, Index input_dim) {
  std::visit(overloaded{
                 [](const GaussianMeasure& g) {
                   if (!(g.variance > 0.0)) throw ArgumentError("gaussian measure: variance must be > 0");
                 },
                 [&](const MvnDiagMeasure& g) {
                   if (static_cast<Index>(g.variances.size()) != input_dim) {
                     throw ArgumentError("mvn-diag measure: need one variance per input coordinate");
                   }
                   for (double v : g.variances) {
                     if (!(v > 0.0)) throw ArgumentError("mvn-diag measure: variances must be > 0");
                   }
                 },
                 [](const LaplaceMeasure& l) {
                   if (!(l.scale > 0.0) || !std::isfinite(l.location)) {
                     throw ArgumentError("laplace measure: scale must be > 0");
                   }
                 },
                 [](const BetaMeasure& b) {
                   if (!(b.alpha > 0.0) || !(b.beta > 0.0)) {
                     throw ArgumentError("beta measure: alpha and beta must be > 0");
                   }
                 },
             },
             measure);
}

std::string measure_kind(const SpectralMeasure& measure) {
  return std::visit(overloaded{
                        [](const GaussianMeasure&) { return std::string("gaussian"); },
                        [](const MvnDiagMeasure&) { return std::string("mvn-diag"); },
                        [](const LaplaceMeasure&) { return std::string("laplace"); },
                        [](const BetaMeasure&) { return std::string("beta"); },
                    },
                    measure);
}

FeatureMap FeatureMap::random_fourier(Index input_dim, Index features, double sigma_f,
                                      const SpectralMeasure& measure, std::uint64_t seed) {
  require_dims(input_dim, features);
  validate_measure(measure, input_dim);
  if (!(sigma_f > 0.0)) throw ArgumentError("feature map: sigma_f must be > 0");
  Rng rng = make_rng(seed);
  FeatureMap fm;
  fm.variant_ = FeatureVariant::rff;
  fm.projection_ = sample_projection(measure, features, input_dim, rng);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  fm.bias_.resize(features);
  for (Index i = 0; i < features; ++i) {
    const double b = phase(rng);
    fm.bias_[i] = b >= kTwoPi ? 0.0 : b;
  }
  fm.sigma_f_ = sigma_f;
  fm.measure_ = measure;
  fm.seed_ = seed;
  return fm;
}

FeatureMap FeatureMap::sigmoid(Index input_dim, Index features, double amplitude, double alpha,
                               const SpectralMeasure& measure, std::uint64_t seed) {
  require_dims(input_dim, features);
  validate_measure(measure, input_dim);
  if (!(alpha > 0.0)) throw ArgumentError("sigmoid feature map: alpha must be > 0");
  Rng rng = make_rng(seed);
  FeatureMap fm;
  fm.variant_ = FeatureVariant::sigmoid;
  fm.projection_ = sample_projection(measure, features, input_dim, rng);
  fm.bias_ = Vector::Zero(features);
  fm.amplitude_ = amplitude;
  fm.alpha_ = alpha;
  fm.measure_ = measure;
  fm.seed_ = seed;
  return fm;
}

FeatureMap FeatureMap::from_parts(FeatureVariant variant, Matrix projection, Vector bias,
                                  double sigma_f, double amplitude, double alpha,
                                  SpectralMeasure measure, std::uint64_t seed) {
  if (bias.size() != projection.rows()) throw DimensionError("feature map: bias length must equal D");
  require_finite(projection, "feature map projection");
  FeatureMap fm;
  fm.variant_ = variant;
  fm.projection_ = std::move(projection);
  fm.bias_ = std::move(bias);
  fm.sigma_f_ = sigma_f;
  fm.amplitude_ = amplitude;
  fm.alpha_ = alpha;
  fm.measure_ = std::move(measure);
  fm.seed_ = seed;
  return fm;
}

Vector FeatureMap::apply(const Vector& x) const {
  if (x.size() != input_dim()) throw DimensionError("feature map: input has wrong dimension");
  const Vector u = projection_ * x;
  if (variant_ == FeatureVariant::rff) {
    const double c = std::sqrt(2.0 / static_cast<double>(features())) * sigma_f_;
    return c * (u + bias_).array().cos().matrix();
  }
  return (amplitude_ / (1.0 + alpha_ * (-u.array()).exp())).matrix();
}

Matrix FeatureMap::apply_rows(const Matrix& x) const {
  if (x.cols() != input_dim()) throw DimensionError("feature map: inputs have wrong column count");
  Matrix u = x * projection_.transpose();
  if (variant_ == FeatureVariant::rff) {
    u.rowwise() += bias_.transpose();
    const double c = std::sqrt(2.0 / static_cast<double>(features())) * sigma_f_;
    return c * u.array().cos().matrix();
  }
  return (amplitude_ / (1.0 + alpha_ * (-u.array()).exp())).matrix();
}

Matrix FeatureMap::jacobian(const Vector& x) const {
  if (x.size() != input_dim()) throw DimensionError("feature map: input has wrong dimension");
  const Vector u = projection_ * x;
  Vector dz;
  if (variant_ == FeatureVariant::rff) {
    const double c = std::sqrt(2.0 / static_cast<double>(features())) * sigma_f_;
    dz = -c * (u + bias_).array().sin().matrix();
  } else {
    const Eigen::ArrayXd e = alpha_ * (-u.array()).exp();
    dz = (amplitude_ * e / (1.0 + e).square()).matrix();
  }
  return dz.asDiagonal() * projection_;
}

Matrix FeatureMap::lift_gradient(const Vector& x, const Matrix& dxf) const {
  if (dxf.cols() != input_dim()) throw DimensionError("lift_gradient: gradient has wrong column count");
  const SvdResult dec = svd(jacobian(x));
  const Index m = input_dim();
  const double smax = dec.sigma.size() ? dec.sigma[0] : 0.0;
  if (dec.sigma.size() < m || !(dec.sigma[m - 1] > 1e-12 * smax)) {
    throw SingularityError(
        "lift_gradient: feature-map Jacobian is rank deficient; resample the feature map or "
        "increase the feature dimension");
  }
  // dxf * V * Sigma^-1 * U^T
  const Matrix left = dxf * dec.v * dec.sigma.cwiseInverse().asDiagonal();
  return left * dec.u.transpose();
}

double FeatureMap::kernel_estimate(const Vector& x, const Vector& y) const {
  if (variant_ != FeatureVariant::rff) {
    throw UnsupportedError("kernel_estimate: only defined for random Fourier features");
  }
  return apply(x).dot(apply(y)) / (sigma_f_ * sigma_f_);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const SpectralMeasure& measure) {
  nlohmann::json j;
  j["kind"] = measure_kind(measure);
  std::visit(overloaded{
                 [&](const GaussianMeasure& g) { j["params"] = {{"variance", g.variance}}; },
                 [&](const MvnDiagMeasure& g) { j["params"] = {{"variances", g.variances}}; },
                 [&](const LaplaceMeasure& l) {
                   j["params"] = {{"location", l.location}, {"scale", l.scale}};
                 },
                 [&](const BetaMeasure& b) { j["params"] = {{"alpha", b.alpha}, {"beta", b.beta}}; },
             },
             measure);
  return j;
}

static SpectralMeasure measure_from_json_unchecked(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  if (kind == "gaussian") return GaussianMeasure{p.at("variance").get<double>()};
  if (kind == "mvn-diag") return MvnDiagMeasure{p.at("variances").get<std::vector<double>>()};
  if (kind == "laplace") return LaplaceMeasure{p.at("location").get<double>(), p.at("scale").get<double>()};
  if (kind == "beta") return BetaMeasure{p.at("alpha").get<double>(), p.at("beta").get<double>()};
  throw SchemaError("unknown spectral measure kind '" + kind + "'");
}

SpectralMeasure measure_from_json(const nlohmann::json& j) {
  return schema_guard("spectral measure JSON", [&] { return measure_from_json_unchecked(j); });
}

nlohmann::json to_json(const FeatureMap& fm) {
  nlohmann::json j;
  j["variant"] = fm.variant() == FeatureVariant::rff ? "rff" : "sigmoid";
  j["D"] = fm.features();
  j["m"] = fm.input_dim();
  j["sigma_f"] = fm.sigma_f();
  if (fm.variant() == FeatureVariant::sigmoid) {
    j["C"] = fm.amplitude();
    j["alpha"] = fm.alpha();
  }
  j["seed"] = fm.seed();
  j["measure"] = to_json(fm.measure());
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(fm.projection().size()));
  for (Index i = 0; i < fm.features(); ++i) {
    for (Index k = 0; k < fm.input_dim(); ++k) w.push_back(fm.projection()(i, k));
  }
  j["W"] = std::move(w);
  j["b"] = std::vector<double>(fm.bias().data(), fm.bias().data() + fm.bias().size());
  return j;
}

static FeatureMap feature_map_from_json_unchecked(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant != "rff" && variant != "sigmoid") throw SchemaError("unknown feature map variant '" + variant + "'");
  const Index features = j.at("D").get<Index>();
  const Index m = j.at("m").get<Index>();
  const auto w = j.at("W").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<Index>(w.size()) != features * m || static_cast<Index>(b.size()) != features) {
    throw SchemaError("feature map JSON: W or b has the wrong length");
  }
  Matrix projection(features, m);
  for (Index i = 0; i < features; ++i) {
    for (Index k = 0; k < m; ++k) projection(i, k) = w[static_cast<std::size_t>(i * m + k)];
  }
  Vector bias = Eigen::Map<const Vector>(b.data(), features);
  const bool rff = variant == "rff";
  return FeatureMap::from_parts(rff ? FeatureVariant::rff : FeatureVariant::sigmoid, std::move(projection),
                                std::move(bias), j.at("sigma_f").get<double>(),
                                rff ? 1.0 : j.at("C").get<double>(), rff ? 1.0 : j.at("alpha").get<double>(),
                                measure_from_json(j.at("measure")), j.at("seed").get<std::uint64_t>());
}

FeatureMap feature_map_from_json(const nlohmann::json& j) {
  return schema_guard("feature map JSON", [&] { return feature_map_from_json_unchecked(j); });
}

}  // namespace kas
