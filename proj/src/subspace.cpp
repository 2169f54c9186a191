#include "kaslib/subspace.hpp"

#include <cmath>
#include <limits>

#include "kaslib/error.hpp"
#include "kaslib/json_util.hpp"

namespace kas {

namespace {

bool is_identity(const Matrix& m) {
  return m.rows() == m.cols() && m == Matrix::Identity(m.rows(), m.cols());
}

SubspaceResult decompose(const Matrix& h, int r, SubspaceKind kind) {
  EigenDecomposition eig = sym_eig_desc(h);
  const Index n = eig.values.size();
  const double top = n > 0 ? std::max(eig.values[0], 0.0) : 0.0;
  for (Index i = 0; i < n; ++i) {
    // Round-off below zero; anything more negative means a broken metric.
    if (eig.values[i] < 0.0 && eig.values[i] >= -1e-10 * top) eig.values[i] = 0.0;
  }
  SubspaceResult res;
  res.eigvals = std::move(eig.values);
  res.W1 = eig.vectors.leftCols(r);
  res.W2 = eig.vectors.rightCols(n - r);
  res.r = r;
  res.kind = kind;
  return res;
}

}  // namespace

Matrix covariance(std::span<const Matrix> jacobians, const Matrix& metric) {
  if (jacobians.empty()) throw ArgumentError("covariance: need at least one Jacobian");
  const Index d = jacobians.front().rows();
  const Index p = jacobians.front().cols();
  if (metric.rows() != d || metric.cols() != d) {
    throw DimensionError("covariance: metric must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  const Index count = static_cast<Index>(jacobians.size());

  // Stack L^T J_k (R_V = L L^T) so that H = G^T G / M; a rank update keeps
  // the accumulation order fixed and the result exactly symmetric.
  Matrix factor_t;
  const bool identity = is_identity(metric);
  if (!identity) {
    Eigen::LLT<Matrix> llt(0.5 * (metric + metric.transpose()));
    if (llt.info() != Eigen::Success) throw DomainError("covariance: metric is not positive definite");
    factor_t = llt.matrixL().transpose();
  }
  Matrix stacked(count * d, p);
  for (Index k = 0; k < count; ++k) {
    const Matrix& jac = jacobians[static_cast<std::size_t>(k)];
    if (jac.rows() != d || jac.cols() != p) {
      throw DimensionError("covariance: Jacobian " + std::to_string(k) + " has shape " +
                           std::to_string(jac.rows()) + "x" + std::to_string(jac.cols()));
    }
    if (identity) {
      stacked.middleRows(k * d, d) = jac;
    } else {
      stacked.middleRows(k * d, d).noalias() = factor_t * jac;
    }
  }
  require_finite(stacked, "covariance");
  Matrix h = Matrix::Zero(p, p);
  h.selfadjointView<Eigen::Lower>().rankUpdate(stacked.transpose(), 1.0 / static_cast<double>(count));
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

SubspaceResult active_subspace(const GradientDataset& ds, int r) {
  if (r < 1 || r >= ds.input_dim()) {
    throw ArgumentError("active_subspace: r=" + std::to_string(r) + " must lie in [1, " +
                        std::to_string(ds.input_dim() - 1) + "]");
  }
  if (ds.dY.empty()) throw ArgumentError("active_subspace: dataset is empty");
  return decompose(covariance(ds.dY, ds.metric_or_identity()), r, SubspaceKind::as);
}

SubspaceResult kernel_active_subspace(const GradientDataset& ds, const FeatureMap& fm, int r) {
  if (fm.input_dim() != ds.input_dim()) {
    throw DimensionError("kernel_active_subspace: feature map expects m=" + std::to_string(fm.input_dim()) +
                         " but dataset has m=" + std::to_string(ds.input_dim()));
  }
  if (r < 1 || r >= fm.features()) {
    throw ArgumentError("kernel_active_subspace: r=" + std::to_string(r) + " must lie in [1, " +
                        std::to_string(fm.features() - 1) + "]");
  }
  if (ds.dY.empty()) throw ArgumentError("kernel_active_subspace: dataset is empty");
  const Matrix xn = normalize(ds.X, ds.spec);
  std::vector<Matrix> lifted;
  lifted.reserve(ds.dY.size());
  for (Index k = 0; k < ds.size(); ++k) {
    try {
      lifted.push_back(fm.lift_gradient(xn.row(k).transpose(), ds.dY[static_cast<std::size_t>(k)]));
    } catch (const SingularityError& e) {
      throw SingularityError("sample " + std::to_string(k) + ": " + e.what());
    }
  }
  SubspaceResult res = decompose(covariance(lifted, ds.metric_or_identity()), r, SubspaceKind::kas);
  res.feature_map = fm;
  return res;
}

Matrix project(const SubspaceResult& res, const Matrix& x) {
  if (res.kind == SubspaceKind::as) {
    if (x.cols() != res.W1.rows()) throw DimensionError("project: input column count differs from m");
    return x * res.W1;
  }
  if (!res.feature_map) throw StateError("project: KAS result carries no feature map");
  if (x.cols() != res.feature_map->input_dim()) {
    throw DimensionError("project: input column count differs from m");
  }
  return res.feature_map->apply_rows(x) * res.W1;
}

std::vector<double> eigenvalue_gaps(const SubspaceResult& res) {
  std::vector<double> gaps;
  for (Index i = 0; i + 1 < res.eigvals.size(); ++i) {
    const double den = res.eigvals[i + 1];
    gaps.push_back(den > 0.0 ? res.eigvals[i] / den : std::numeric_limits<double>::infinity());
  }
  return gaps;
}

double projector_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("projector_distance: ambient dimensions differ");
  auto orth = [](const Matrix& m) -> Matrix {
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  };
  const Matrix qa = orth(a);
  const Matrix qb = orth(b);
  const Matrix diff = qa * qa.transpose() - qb * qb.transpose();
  if (diff.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(diff).singularValues()[0];
}

nlohmann::json to_json(const SubspaceResult& res, bool include_inactive) {
  nlohmann::json j;
  j["kind"] = res.kind == SubspaceKind::as ? "AS" : "KAS";
  j["r"] = res.r;
  j["eigvals"] = vector_to_json(res.eigvals);
  j["W1"] = matrix_to_json(res.W1);
  if (include_inactive && res.W2.size() > 0) j["W2"] = matrix_to_json(res.W2);
  if (res.feature_map) j["feature_map"] = to_json(*res.feature_map);
  return j;
}

static SubspaceResult subspace_from_json_unchecked(const nlohmann::json& j) {
  SubspaceResult res;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "AS" && kind != "KAS") throw SchemaError("subspace JSON: unknown kind '" + kind + "'");
  res.kind = kind == "AS" ? SubspaceKind::as : SubspaceKind::kas;
  res.r = j.at("r").get<int>();
  res.eigvals = vector_from_json(j.at("eigvals"));
  res.W1 = matrix_from_json(j.at("W1"));
  if (j.contains("W2")) res.W2 = matrix_from_json(j.at("W2"));
  if (j.contains("feature_map")) res.feature_map = feature_map_from_json(j.at("feature_map"));
  if (res.W1.cols() != res.r) throw SchemaError("subspace JSON: W1 column count differs from r");
  return res;
}

SubspaceResult subspace_from_json(const nlohmann::json& j) {
  return schema_guard("subspace JSON", [&] { return subspace_from_json_unchecked(j); });
}

}  // namespace kas
