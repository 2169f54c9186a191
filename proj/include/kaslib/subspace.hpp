#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "kaslib/datasets.hpp"
#include "kaslib/featuremap.hpp"
#include "kaslib/numerics.hpp"

namespace kas {

enum class SubspaceKind { as, kas };

struct SubspaceResult {
  Vector eigvals;  // descending, length m (AS) or D (KAS)
  Matrix W1;       // active eigenvectors, one per column
  Matrix W2;       // inactive eigenvectors; may be empty after deserialization
  int r = 0;
  SubspaceKind kind = SubspaceKind::as;
  std::optional<FeatureMap> feature_map;  // KAS only

  /// Dimension of the space the eigenvectors live in (m or D).
  Index ambient_dim() const noexcept { return W1.rows(); }
  Matrix projector() const { return W1 * W1.transpose(); }
};

/// (1/M) sum_k J_k^T R_V J_k for d x p Jacobians J_k. The result is exactly
/// symmetric.
Matrix covariance(std::span<const Matrix> jacobians, const Matrix& metric);

/// Classic active subspace of the dataset's gradient covariance.
SubspaceResult active_subspace(const GradientDataset& ds, int r);

/// Active subspace of the gradients lifted into the feature space of `fm`.
SubspaceResult kernel_active_subspace(const GradientDataset& ds, const FeatureMap& fm, int r);

/// Reduced coordinates of (normalized) inputs: X W1 for AS, phi(X) W1 for KAS.
Matrix project(const SubspaceResult& res, const Matrix& x);

/// Ratios lambda_i / lambda_{i+1}; +inf where the denominator vanishes.
std::vector<double> eigenvalue_gaps(const SubspaceResult& res);

/// ||P_a - P_b||_2 for the orthogonal projectors onto span(A) and span(B).
double projector_distance(const Matrix& a, const Matrix& b);

nlohmann::json to_json(const SubspaceResult& res, bool include_inactive = true);
SubspaceResult subspace_from_json(const nlohmann::json& j);

}  // namespace kas
