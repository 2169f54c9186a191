#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kaslib/numerics.hpp"

namespace kas {

/// Spectral measures the projection matrix rows can be drawn from. Every
/// entry of W is sampled independently.
struct GaussianMeasure {
  double variance = 1.0;  // W_ij ~ N(0, variance)
};
struct MvnDiagMeasure {
  std::vector<double> variances;  // W_ij ~ N(0, variances[j])
};
struct LaplaceMeasure {
  double location = 0.0;
  double scale = 1.0;
};
struct BetaMeasure {
  double alpha = 1.0;
  double beta = 1.0;
};

using SpectralMeasure = std::variant<GaussianMeasure, MvnDiagMeasure, LaplaceMeasure, BetaMeasure>;

void validate_measure(const SpectralMeasure& measure, Index input_dim);
std::string measure_kind(const SpectralMeasure& measure);

enum class FeatureVariant { rff, sigmoid };

/// Random feature map phi: R^m -> R^D.
///
/// RFF:     z_j = sqrt(2/D) * sigma_f * cos(w_j . x + b_j)
/// Sigmoid: z_j = C / (1 + alpha * exp(-w_j . x))
class FeatureMap {
 public:
  /// Draws W (D x m) from `measure` and b uniformly in [0, 2 pi).
  static FeatureMap random_fourier(Index input_dim, Index features, double sigma_f,
                                   const SpectralMeasure& measure, std::uint64_t seed);
  static FeatureMap sigmoid(Index input_dim, Index features, double amplitude, double alpha,
                            const SpectralMeasure& measure, std::uint64_t seed);

  /// Explicit construction, mostly for tests and deserialization. Does not
  /// enforce D > m so that hand-built edge cases stay expressible.
  static FeatureMap from_parts(FeatureVariant variant, Matrix projection, Vector bias,
                               double sigma_f, double amplitude, double alpha,
                               SpectralMeasure measure, std::uint64_t seed);

  FeatureVariant variant() const noexcept { return variant_; }
  Index input_dim() const noexcept { return projection_.cols(); }
  Index features() const noexcept { return projection_.rows(); }
  const Matrix& projection() const noexcept { return projection_; }
  const Vector& bias() const noexcept { return bias_; }
  double sigma_f() const noexcept { return sigma_f_; }
  double amplitude() const noexcept { return amplitude_; }
  double alpha() const noexcept { return alpha_; }
  const SpectralMeasure& measure() const noexcept { return measure_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Vector apply(const Vector& x) const;
  /// Row-wise application to an M x m matrix, giving M x D.
  Matrix apply_rows(const Matrix& x) const;
  /// D x m Jacobian d phi / d x.
  Matrix jacobian(const Vector& x) const;
  /// dxf (d x m) times the pseudoinverse of the Jacobian at x, i.e. the
  /// minimum-norm gradient of f~ with respect to z = phi(x).
  Matrix lift_gradient(const Vector& x, const Matrix& dxf) const;
  /// z(x).z(y) / sigma_f^2, an unbiased estimate of the stationary kernel
  /// associated with the spectral measure. RFF only.
  double kernel_estimate(const Vector& x, const Vector& y) const;

 private:
  FeatureVariant variant_ = FeatureVariant::rff;
  Matrix projection_;
  Vector bias_;
  double sigma_f_ = 1.0;
  double amplitude_ = 1.0;
  double alpha_ = 1.0;
  SpectralMeasure measure_;
  std::uint64_t seed_ = 0;
};

nlohmann::json to_json(const SpectralMeasure& measure);
SpectralMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FeatureMap& fm);
FeatureMap feature_map_from_json(const nlohmann::json& j);

}  // namespace kas
