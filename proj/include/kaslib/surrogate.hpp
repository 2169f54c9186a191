#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "kaslib/datasets.hpp"
#include "kaslib/featuremap.hpp"
#include "kaslib/gpr.hpp"
#include "kaslib/subspace.hpp"

namespace kas {

enum class Method { as, kas };

std::string method_name(Method method);
Method parse_method(const std::string& name);

/// Ridge approximation f(x) ~ h(W1^T x) (AS) or h(W1^T phi(x)) (KAS), with
/// the profile h a Gaussian process over the reduced coordinates.
struct Surrogate {
  SubspaceResult subspace;
  GpModel gp;
  InputSpec spec;  // normalization record

  Index input_dim() const noexcept { return spec.dim(); }
};

/// Normalizes inputs, computes the (kernel) active subspace, projects the
/// training inputs and fits the GP.
Surrogate fit_surrogate(const GradientDataset& ds, Method method, int r,
                        const std::optional<FeatureMap>& fm = std::nullopt,
                        const GpFitOptions& gp_options = {});

/// Reduced coordinates of physical inputs.
Matrix reduced_coordinates(const Surrogate& s, const Matrix& x);

/// Normalizes (range-checking), projects and evaluates the GP per row.
GpBatchPrediction predict(const Surrogate& s, const Matrix& x);

/// Fits on `train` and returns the RRMSE of the predictions on `test`.
double holdout_rrmse(const GradientDataset& train, const GradientDataset& test, Method method, int r,
                     const std::optional<FeatureMap>& fm = std::nullopt, const GpFitOptions& gp_options = {});

nlohmann::json to_json(const InputSpec& spec);
InputSpec input_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Surrogate& s);
Surrogate surrogate_from_json(const nlohmann::json& j);

}  // namespace kas
