#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kaslib/datasets.hpp"
#include "kaslib/numerics.hpp"
#include "kaslib/subspace.hpp"

namespace kas {

/// Analytic model with exact Jacobian. `eval` and `jacobian` act on physical
/// inputs and do not range-check.
struct Benchmark {
  std::string name;
  InputSpec spec;
  Index output_dim = 1;
  std::function<Vector(const Vector&)> eval;
  std::function<Matrix(const Vector&)> jacobian;  // d x m, physical coordinates
  std::optional<Matrix> metric;                   // output-space R_V, if any
};

// f(x) = 1/2 |x|^2 on [-1, 1]^8.
double paraboloid(const Vector& x);
Vector paraboloid_gradient(const Vector& x);

// f(x) = sin(|x|^2) on [-3, 3]^2.
double sine_revolution(const Vector& x);
Vector sine_revolution_gradient(const Vector& x);

/// Basic reproduction number of the SEIR Ebola model.
/// Parameter order: beta1, beta2, beta3, rho1, gamma1, gamma2, omega, psi.
/// Throws RangeError outside the parameter table.
double ebola_r0(const Vector& p);
Vector ebola_r0_gradient(const Vector& p);
InputSpec ebola_spec();

/// f_j(x) = 1/2 x^T A_j x with seeded SPD forms A_j = B_j^T B_j + I.
class VecQuadratic {
 public:
  VecQuadratic(Index input_dim = 10, Index output_dim = 6, std::uint64_t seed = 0);
  explicit VecQuadratic(std::vector<Matrix> forms);

  Vector operator()(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;
  const std::vector<Matrix>& forms() const noexcept { return forms_; }
  Index input_dim() const noexcept { return forms_.front().rows(); }
  Index output_dim() const noexcept { return static_cast<Index>(forms_.size()); }

 private:
  std::vector<Matrix> forms_;
};

/// Registered names: paraboloid, sine, ebola, vec-quadratic.
Benchmark make_benchmark(const std::string& name, std::uint64_t seed = 0);
std::vector<std::string> benchmark_names();

/// Samples inputs from the benchmark's spec and records outputs and
/// Jacobians with respect to the normalized coordinates.
GradientDataset generate_dataset(const Benchmark& bench, Index samples, std::uint64_t seed);

/// Monte Carlo estimate of the conditional-expectation profile
/// (1/N) sum_i f(P x + (I - P) Y_i), Y_i ~ spec, with P = W1 W1^T acting in
/// normalized coordinates. `x` is a physical input. AS results only.
double mc_profile(const Benchmark& bench, const SubspaceResult& res, const Vector& x, Index samples,
                  std::uint64_t seed);

/// Per-draw values f(P x + (I - P) Y_i) behind mc_profile; useful for
/// standard errors.
Vector mc_profile_draws(const Benchmark& bench, const SubspaceResult& res, const Vector& x, Index samples,
                        std::uint64_t seed);

}  // namespace kas
