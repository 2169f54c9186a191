#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kaslib/numerics.hpp"

namespace kas {

struct Uniform {
  double lower = -1.0;
  double upper = 1.0;
};

struct StandardNormal {};

using Distribution = std::variant<Uniform, StandardNormal>;

/// Per-coordinate input distribution.
struct InputSpec {
  std::vector<Distribution> coords;
  std::vector<std::string> names;  // empty or one per coordinate

  Index dim() const noexcept { return static_cast<Index>(coords.size()); }
  void validate() const;

  static InputSpec uniform_box(const std::vector<double>& lower, const std::vector<double>& upper);
  static InputSpec uniform_cube(Index m, double lower, double upper);
  static InputSpec standard_normal(Index m);

  std::string name(Index i) const;
};

/// Samples with inputs X (M x m), outputs Y (M x d) and per-sample Jacobians
/// (d x m each). Jacobians are taken with respect to normalized inputs.
struct GradientDataset {
  Matrix X;
  Matrix Y;
  std::vector<Matrix> dY;
  InputSpec spec;
  std::optional<Matrix> metric;

  Index size() const noexcept { return X.rows(); }
  Index input_dim() const noexcept { return X.cols(); }
  Index output_dim() const noexcept { return Y.cols(); }

  /// R_V, or the identity when no metric was supplied.
  Matrix metric_or_identity() const;
  void validate() const;
  GradientDataset subset(const std::vector<Index>& rows) const;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  std::vector<Index> test_indices(int fold) const;
  std::vector<Index> train_indices(int fold) const;
};

/// M i.i.d. rows drawn from `spec`; deterministic given the seed.
Matrix sample_inputs(const InputSpec& spec, Index samples, std::uint64_t seed);

/// Uniform coordinates are mapped affinely onto [-1, 1]; Gaussian ones are
/// passed through. Throws RangeError naming the coordinate on out-of-bounds
/// values.
Matrix normalize(const Matrix& x, const InputSpec& spec);
Matrix denormalize(const Matrix& x, const InputSpec& spec);

/// Per-coordinate factor d(physical)/d(normalized); 1 for Gaussian inputs.
Vector normalization_scale(const InputSpec& spec);

/// Random balanced partition of [0, M) into k folds whose sizes differ by at
/// most one.
FoldPlan kfold(Index samples, int k, std::uint64_t seed);

struct DatasetPaths {
  std::filesystem::path inputs;
  std::filesystem::path outputs;
  std::filesystem::path gradients;
  std::optional<std::filesystem::path> metric;

  static DatasetPaths in_directory(const std::filesystem::path& dir, bool with_metric = false);
};

/// Reads the CSV layout: inputs.csv (x1..xm), outputs.csv (y1..yd),
/// gradients.csv (g_1_1..g_d_m, row-major d x m) and an optional headerless
/// d x d metric.csv. The returned spec treats inputs as already normalized.
GradientDataset read_dataset(const DatasetPaths& paths);
void write_dataset(const GradientDataset& ds, const DatasetPaths& paths);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Plain CSV matrix helpers; values are written with 17 significant digits.
Matrix read_csv_matrix(const std::filesystem::path& path, bool has_header,
                       std::vector<std::string>* header = nullptr);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& data,
                      const std::vector<std::string>& header);

}  // namespace kas
