#include "kaslib/gpr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "kaslib/error.hpp"
#include "kaslib/json_util.hpp"

namespace kas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double column_range_scale(const Matrix& x) {
  double scale = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (x.rows() == 0) break;
    scale = std::max(scale, x.col(j).maxCoeff() - x.col(j).minCoeff());
  }
  return scale > 0.0 && std::isfinite(scale) ? scale : 1.0;
}

struct ProfiledPoint {
  double nll = kInf;
  double log_lengthscale = 0.0;
  double log_ratio = 0.0;   // log(noise / signal)
  double signal_variance = 1.0;
};

// NLL with the signal variance s^2 minimized in closed form:
// K = s^2 (K1 + eta I)  =>  s^2 = sum_c y_c^T (K1 + eta I)^{-1} y_c / (d N).
ProfiledPoint profiled_nll(const Matrix& x, const Matrix& yc, double log_l, double log_eta) {
  ProfiledPoint p;
  p.log_lengthscale = log_l;
  p.log_ratio = log_eta;
  const double n = static_cast<double>(x.rows());
  const double d = static_cast<double>(yc.cols());
  try {
    const Matrix k1 = rbf_kernel(x, x, std::exp(log_l), 1.0);
    const Cholesky chol(k1, std::exp(log_eta));
    const Matrix alpha = chol.solve(yc);
    const double q = (yc.array() * alpha.array()).sum();
    const double s2 = std::max(q / (d * n), 1e-300);
    p.signal_variance = s2;
    p.nll = 0.5 * d * (n * std::log(s2) + chol.log_det()) + 0.5 * d * n * (1.0 + kLog2Pi);
    if (!std::isfinite(p.nll)) p.nll = kInf;
  } catch (const FactorizationError&) {
    p.nll = kInf;
  }
  return p;
}

}  // namespace

void KernelConfig::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) throw ArgumentError("kernel: lengthscale must be > 0");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ArgumentError("kernel: signal variance must be > 0");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ArgumentError("kernel: noise variance must be >= 0");
  }
}

Matrix rbf_kernel(const Matrix& a, const Matrix& b, double lengthscale, double signal_variance) {
  if (a.cols() != b.cols()) throw DimensionError("rbf_kernel: inputs have different dimensions");
  const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
  Matrix k(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      double sq = 0.0;
      for (Index c = 0; c < a.cols(); ++c) {
        const double diff = a(i, c) - b(j, c);
        sq += diff * diff;
      }
      k(i, j) = signal_variance * std::exp(-sq * inv);
    }
  }
  return k;
}

double negative_log_likelihood(const Matrix& inputs, const Matrix& centered_targets,
                               const KernelConfig& cfg) {
  cfg.validate();
  if (inputs.rows() != centered_targets.rows()) throw DimensionError("nll: row counts differ");
  const double n = static_cast<double>(inputs.rows());
  const double d = static_cast<double>(centered_targets.cols());
  try {
    const Matrix k = rbf_kernel(inputs, inputs, cfg.lengthscale, cfg.signal_variance);
    const Cholesky chol(k, std::max(cfg.noise_variance, kNoiseFloor * cfg.signal_variance));
    const Matrix alpha = chol.solve(centered_targets);
    const double q = (centered_targets.array() * alpha.array()).sum();
    return 0.5 * q + 0.5 * d * chol.log_det() + 0.5 * d * n * kLog2Pi;
  } catch (const FactorizationError&) {
    return kInf;
  }
}

// ---------------------------------------------------------------------------
// GpModel

GpModel::GpModel(Matrix inputs, Matrix targets, KernelConfig cfg, Vector prior_mean)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), cfg_(cfg), prior_mean_(std::move(prior_mean)) {
  cfg_.validate();
  if (inputs_.rows() != targets_.rows()) throw DimensionError("gp: inputs and targets have different row counts");
  if (inputs_.rows() < 1) throw ArgumentError("gp: need at least one training point");
  require_finite(inputs_, "gp inputs");
  require_finite(targets_, "gp targets");
  if (prior_mean_.size() == 0) prior_mean_ = Vector::Zero(targets_.cols());
  if (prior_mean_.size() != targets_.cols()) throw DimensionError("gp: prior mean length differs from outputs");

  const Matrix k = rbf_kernel(inputs_, inputs_, cfg_.lengthscale, cfg_.signal_variance);
  auto chol = std::make_shared<const Cholesky>(
      k, std::max(cfg_.noise_variance, kNoiseFloor * cfg_.signal_variance));
  effective_noise_ = chol->jitter();
  const Matrix centered = targets_.rowwise() - prior_mean_.transpose();
  weights_ = chol->solve(centered);
  const double n = static_cast<double>(inputs_.rows());
  const double d = static_cast<double>(targets_.cols());
  nll_ = 0.5 * (centered.array() * weights_.array()).sum() + 0.5 * d * chol->log_det() +
         0.5 * d * n * kLog2Pi;
  chol_ = std::move(chol);
}

GpBatchPrediction GpModel::predict(const Matrix& x) const {
  if (x.cols() != inputs_.cols()) {
    throw DimensionError("gp predict: query has dimension " + std::to_string(x.cols()) + ", model has " +
                         std::to_string(inputs_.cols()));
  }
  GpBatchPrediction out;
  if (x.rows() == 0) {
    out.means.resize(0, targets_.cols());
    out.variances.resize(0);
    return out;
  }
  const Matrix kx = rbf_kernel(inputs_, x, cfg_.lengthscale, cfg_.signal_variance);  // N x Q
  out.means = kx.transpose() * weights_;
  out.means.rowwise() += prior_mean_.transpose();
  const Matrix v = chol_->solve_lower(kx);
  out.variances = (cfg_.signal_variance - v.colwise().squaredNorm().array()).matrix().transpose();
  for (Index i = 0; i < out.variances.size(); ++i) out.variances[i] = std::max(out.variances[i], 0.0);
  return out;
}

GpPrediction GpModel::predict(const Vector& x) const {
  const GpBatchPrediction batch = predict(Matrix(x.transpose()));
  return {batch.means.row(0).transpose(), batch.variances[0]};
}

// ---------------------------------------------------------------------------
// Fitting

GpModel gp_fit(const Matrix& inputs, const Matrix& targets, const KernelConfig& init,
               const GpFitOptions& options) {
  if (inputs.rows() < 2) throw ArgumentError("gp_fit: need at least two training points");
  if (inputs.rows() != targets.rows()) throw DimensionError("gp_fit: inputs and targets have different row counts");
  require_finite(inputs, "gp_fit inputs");
  require_finite(targets, "gp_fit targets");
  init.validate();
  if (options.grid_points < 2) throw ArgumentError("gp_fit: grid needs at least two points per axis");

  const Vector mean = options.center ? Vector(targets.colwise().mean().transpose())
                                     : Vector(Vector::Zero(targets.cols()));
  const Matrix yc = targets.rowwise() - mean.transpose();

  const double scale = column_range_scale(inputs);
  const double l_lo = std::log(1e-3 * scale);
  const double l_hi = std::log(1e3 * scale);
  const double eta_lo = std::log(kNoiseFloor);
  const double eta_hi = std::log(10.0);

  // Starting point: the caller's configuration, unprofiled.
  const double init_nll = negative_log_likelihood(inputs, yc, init);
  KernelConfig best_cfg = init;
  double best_nll = init_nll;

  ProfiledPoint best;
  const int g = options.grid_points;
  for (int a = 0; a < g; ++a) {
    const double ll = l_lo + (l_hi - l_lo) * a / (g - 1);
    for (int b = 0; b < g; ++b) {
      const double le = eta_lo + (eta_hi - eta_lo) * b / (g - 1);
      const ProfiledPoint p = profiled_nll(inputs, yc, ll, le);
      if (p.nll < best.nll) best = p;
    }
  }

  if (std::isfinite(best.nll)) {
    // Pattern search in (log l, log eta); only strict improvements are
    // accepted so the objective is monotone along the path.
    double step_l = 0.5 * (l_hi - l_lo) / (g - 1);
    double step_e = 0.5 * (eta_hi - eta_lo) / (g - 1);
    int evals = 0;
    while (evals < options.budget && (step_l > 1e-4 || step_e > 1e-4)) {
      bool improved = false;
      const std::array<std::array<double, 2>, 4> moves{{{step_l, 0.0}, {-step_l, 0.0}, {0.0, step_e}, {0.0, -step_e}}};
      for (const auto& mv : moves) {
        const double ll = std::clamp(best.log_lengthscale + mv[0], l_lo, l_hi);
        const double le = std::clamp(best.log_ratio + mv[1], eta_lo, eta_hi);
        if (ll == best.log_lengthscale && le == best.log_ratio) continue;
        const ProfiledPoint p = profiled_nll(inputs, yc, ll, le);
        ++evals;
        if (p.nll < best.nll) {
          best = p;
          improved = true;
          break;
        }
        if (evals >= options.budget) break;
      }
      if (!improved) {
        step_l *= 0.5;
        step_e *= 0.5;
      }
    }
    if (best.nll < best_nll) {
      best_nll = best.nll;
      best_cfg.lengthscale = std::exp(best.log_lengthscale);
      best_cfg.signal_variance = best.signal_variance;
      best_cfg.noise_variance = std::exp(best.log_ratio) * best.signal_variance;
    }
  }
  if (!std::isfinite(best_nll)) {
    throw FitError("gp_fit: covariance could not be factorized for any hyperparameter candidate");
  }
  try {
    return GpModel(inputs, targets, best_cfg, mean);
  } catch (const FactorizationError& e) {
    throw FitError(std::string("gp_fit: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scoring

double rrmse(std::span<const double> targets, std::span<const double> preds) {
  if (targets.size() != preds.size()) throw DimensionError("rrmse: targets and predictions differ in length");
  if (targets.size() < 2) throw ArgumentError("rrmse: need at least two targets");
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    num += (preds[i] - targets[i]) * (preds[i] - targets[i]);
    den += (targets[i] - mean) * (targets[i] - mean);
  }
  if (!(den > 0.0)) throw DomainError("rrmse: targets are constant, denominator is zero");
  return std::sqrt(num / den);
}

double rrmse(const Vector& targets, const Vector& preds) {
  return rrmse(std::span<const double>(targets.data(), static_cast<std::size_t>(targets.size())),
               std::span<const double>(preds.data(), static_cast<std::size_t>(preds.size())));
}

double rrmse(const Matrix& targets, const Matrix& preds) {
  if (targets.rows() != preds.rows() || targets.cols() != preds.cols()) {
    throw DimensionError("rrmse: targets and predictions differ in shape");
  }
  if (targets.cols() == 0) throw ArgumentError("rrmse: no outputs");
  double total = 0.0;
  for (Index c = 0; c < targets.cols(); ++c) {
    total += rrmse(Vector(targets.col(c)), Vector(preds.col(c)));
  }
  return total / static_cast<double>(targets.cols());
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const GpModel& model) {
  nlohmann::json j;
  j["inputs"] = matrix_to_json(model.inputs());
  j["targets"] = matrix_to_json(model.targets());
  j["prior_mean"] = vector_to_json(model.prior_mean());
  j["kernel"] = {{"type", "rbf"},
                 {"lengthscale", model.config().lengthscale},
                 {"signal_variance", model.config().signal_variance},
                 {"noise_variance", model.config().noise_variance}};
  j["effective_noise"] = model.effective_noise();
  return j;
}

static GpModel gp_model_from_json_unchecked(const nlohmann::json& j) {
  const auto& k = j.at("kernel");
  KernelConfig cfg{k.at("lengthscale").get<double>(), k.at("signal_variance").get<double>(),
                   k.at("noise_variance").get<double>()};
  return GpModel(matrix_from_json(j.at("inputs")), matrix_from_json(j.at("targets")), cfg,
                 vector_from_json(j.at("prior_mean")));
}

GpModel gp_model_from_json(const nlohmann::json& j) {
  return schema_guard("GP model JSON", [&] { return gp_model_from_json_unchecked(j); });
}

}  // namespace kas
