#pragma once

#include <memory>
#include <span>

#include <json.hpp>

#include "kaslib/numerics.hpp"

namespace kas {

/// Hyperparameters of the RBF kernel s^2 exp(-|x-y|^2 / 2 l^2) plus white
/// noise of variance sigma.
struct KernelConfig {
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.0;

  void validate() const;
};

/// Smallest noise used during factorization, relative to the signal variance.
inline constexpr double kNoiseFloor = 1e-10;

struct GpPrediction {
  Vector mean;      // one entry per output
  double variance;  // shared by all outputs (same kernel)
};

struct GpBatchPrediction {
  Matrix means;      // Q x d
  Vector variances;  // Q
};

/// Gaussian process posterior for fixed hyperparameters. Targets may have
/// several columns; each column is an independent GP sharing the kernel.
class GpModel {
 public:
  /// `prior_mean` (one entry per output) is subtracted before conditioning.
  /// Empty means zero.
  GpModel(Matrix inputs, Matrix targets, KernelConfig cfg, Vector prior_mean = Vector());

  GpPrediction predict(const Vector& x) const;
  GpBatchPrediction predict(const Matrix& x) const;

  const Matrix& inputs() const noexcept { return inputs_; }
  const Matrix& targets() const noexcept { return targets_; }
  const KernelConfig& config() const noexcept { return cfg_; }
  const Vector& prior_mean() const noexcept { return prior_mean_; }
  /// Noise actually added to the diagonal (floor plus any Cholesky jitter).
  double effective_noise() const noexcept { return effective_noise_; }
  /// Negative log marginal likelihood, summed over outputs.
  double nll() const noexcept { return nll_; }
  /// (K + sigma I)^{-1} (Y - prior_mean).
  const Matrix& weights() const noexcept { return weights_; }

 private:
  Matrix inputs_;
  Matrix targets_;
  KernelConfig cfg_;
  Vector prior_mean_;
  std::shared_ptr<const Cholesky> chol_;
  Matrix weights_;
  double effective_noise_ = 0.0;
  double nll_ = 0.0;
};

/// RBF Gram matrix between the rows of a and b.
Matrix rbf_kernel(const Matrix& a, const Matrix& b, double lengthscale, double signal_variance);

/// Negative log marginal likelihood of (centered) targets under cfg;
/// +inf when the covariance cannot be factorized.
double negative_log_likelihood(const Matrix& inputs, const Matrix& centered_targets,
                               const KernelConfig& cfg);

struct GpFitOptions {
  int budget = 500;       // refinement evaluations after the coarse grid
  int grid_points = 8;    // per axis
  bool center = true;     // use the target mean as prior mean
};

/// Fits hyperparameters by minimizing the negative log marginal likelihood:
/// coarse log grid over (lengthscale, noise/signal ratio) with the signal
/// variance profiled out in closed form, followed by a pattern search.
GpModel gp_fit(const Matrix& inputs, const Matrix& targets, const KernelConfig& init,
               const GpFitOptions& options = {});

/// sqrt(sum (t_i - y_i)^2 / sum (y_i - mean(y))^2) with t = preds, y = targets.
double rrmse(std::span<const double> targets, std::span<const double> preds);
double rrmse(const Vector& targets, const Vector& preds);
/// Mean over output columns of the per-column RRMSE.
double rrmse(const Matrix& targets, const Matrix& preds);

/// Training data, prior mean and hyperparameters; the factorization is
/// rebuilt on load.
nlohmann::json to_json(const GpModel& model);
GpModel gp_model_from_json(const nlohmann::json& j);

}  // namespace kas
