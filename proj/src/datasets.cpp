#include "kaslib/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kaslib/error.hpp"
#include "kaslib/random.hpp"

namespace kas {

// ---------------------------------------------------------------------------
// InputSpec

void InputSpec::validate() const {
  if (coords.empty()) throw ArgumentError("input spec: dimension must be at least 1");
  if (!names.empty() && names.size() != coords.size()) {
    throw ArgumentError("input spec: names must match the number of coordinates");
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (const auto* u = std::get_if<Uniform>(&coords[i])) {
      if (!(u->lower < u->upper) || !std::isfinite(u->lower) || !std::isfinite(u->upper)) {
        throw ArgumentError("input spec: coordinate " + name(static_cast<Index>(i)) +
                            " needs finite lower < upper");
      }
    }
  }
}

InputSpec InputSpec::uniform_box(const std::vector<double>& lower,
                                 const std::vector<double>& upper) {
  if (lower.size() != upper.size()) throw ArgumentError("uniform_box: bound lengths differ");
  InputSpec spec;
  for (std::size_t i = 0; i < lower.size(); ++i) spec.coords.emplace_back(Uniform{lower[i], upper[i]});
  spec.validate();
  return spec;
}

InputSpec InputSpec::uniform_cube(Index m, double lower, double upper) {
  return uniform_box(std::vector<double>(static_cast<std::size_t>(m), lower),
                     std::vector<double>(static_cast<std::size_t>(m), upper));
}

InputSpec InputSpec::standard_normal(Index m) {
  InputSpec spec;
  spec.coords.assign(static_cast<std::size_t>(m), StandardNormal{});
  return spec;
}

std::string InputSpec::name(Index i) const {
  if (!names.empty()) return names[static_cast<std::size_t>(i)];
  return "x" + std::to_string(i + 1);
}

// ---------------------------------------------------------------------------
// GradientDataset

Matrix GradientDataset::metric_or_identity() const {
  if (metric) return *metric;
  return Matrix::Identity(output_dim(), output_dim());
}

void GradientDataset::validate() const {
  const Index m = input_dim();
  const Index d = output_dim();
  if (Y.rows() != X.rows()) throw DimensionError("dataset: inputs and outputs have different row counts");
  if (static_cast<Index>(dY.size()) != X.rows()) {
    throw DimensionError("dataset: expected one Jacobian per sample");
  }
  for (std::size_t i = 0; i < dY.size(); ++i) {
    if (dY[i].rows() != d || dY[i].cols() != m) {
      throw DimensionError("dataset: Jacobian " + std::to_string(i) + " is not " +
                           std::to_string(d) + "x" + std::to_string(m));
    }
  }
  if (spec.dim() != m) throw DimensionError("dataset: input spec dimension differs from inputs");
  if (metric) {
    const Matrix& r = *metric;
    if (r.rows() != d || r.cols() != d) throw DimensionError("dataset: metric must be d x d");
    require_finite(r, "dataset metric");
    if ((r - r.transpose()).norm() > 1e-10 * r.norm()) {
      throw DomainError("dataset: metric is not symmetric");
    }
    Eigen::LLT<Matrix> llt(r);
    if (llt.info() != Eigen::Success) throw DomainError("dataset: metric is not positive definite");
  }
}

GradientDataset GradientDataset::subset(const std::vector<Index>& rows) const {
  GradientDataset out;
  out.X.resize(static_cast<Index>(rows.size()), X.cols());
  out.Y.resize(static_cast<Index>(rows.size()), Y.cols());
  out.dY.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Index>(i)) = X.row(rows[i]);
    out.Y.row(static_cast<Index>(i)) = Y.row(rows[i]);
    out.dY.push_back(dY[static_cast<std::size_t>(rows[i])]);
  }
  out.spec = spec;
  out.metric = metric;
  return out;
}

// ---------------------------------------------------------------------------
// Sampling and normalization

Matrix sample_inputs(const InputSpec& spec, Index samples, std::uint64_t seed) {
  spec.validate();
  if (samples < 1) throw ArgumentError("sample_inputs: need at least one sample");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(samples, spec.dim());
  for (Index i = 0; i < samples; ++i) {
    for (Index j = 0; j < spec.dim(); ++j) {
      const Distribution& dist = spec.coords[static_cast<std::size_t>(j)];
      if (const auto* u = std::get_if<Uniform>(&dist)) {
        const double v = u->lower + (u->upper - u->lower) * unit(rng);
        x(i, j) = std::clamp(v, u->lower, u->upper);
      } else {
        x(i, j) = normal(rng);
      }
    }
  }
  return x;
}

Vector normalization_scale(const InputSpec& spec) {
  Vector scale(spec.dim());
  for (Index j = 0; j < spec.dim(); ++j) {
    const Distribution& dist = spec.coords[static_cast<std::size_t>(j)];
    if (const auto* u = std::get_if<Uniform>(&dist)) {
      scale[j] = 0.5 * (u->upper - u->lower);
    } else {
      scale[j] = 1.0;
    }
  }
  return scale;
}

Matrix normalize(const Matrix& x, const InputSpec& spec) {
  if (x.cols() != spec.dim()) throw DimensionError("normalize: column count differs from spec");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const Distribution& dist = spec.coords[static_cast<std::size_t>(j)];
    const auto* u = std::get_if<Uniform>(&dist);
    if (u == nullptr) {
      out.col(j) = x.col(j);
      continue;
    }
    for (Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      if (!(v >= u->lower && v <= u->upper)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "normalize: value " << v << " of coordinate " << spec.name(j) << " (row " << i
            << ") outside [" << u->lower << ", " << u->upper << "]";
        throw RangeError(msg.str());
      }
      out(i, j) = 2.0 * (v - u->lower) / (u->upper - u->lower) - 1.0;
    }
  }
  return out;
}

Matrix denormalize(const Matrix& x, const InputSpec& spec) {
  if (x.cols() != spec.dim()) throw DimensionError("denormalize: column count differs from spec");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const Distribution& dist = spec.coords[static_cast<std::size_t>(j)];
    if (const auto* u = std::get_if<Uniform>(&dist)) {
      out.col(j) = (u->lower + (x.col(j).array() + 1.0) * 0.5 * (u->upper - u->lower)).matrix();
    } else {
      out.col(j) = x.col(j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Folds

FoldPlan kfold(Index samples, int k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("kfold: need at least 2 folds");
  if (static_cast<Index>(k) > samples) {
    throw ArgumentError("kfold: " + std::to_string(k) + " folds exceed " + std::to_string(samples) +
                        " samples");
  }
  std::vector<Index> order(static_cast<std::size_t>(samples));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = make_rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(samples), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    plan.assignments[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

std::vector<Index> FoldPlan::test_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> FoldPlan::train_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line_no,
                  std::size_t col) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(path.string() + ": line " + std::to_string(line_no) + ", column " +
                     std::to_string(col + 1) + ": cannot parse '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Matrix read_csv_matrix(const std::filesystem::path& path, bool has_header,
                       std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_commas(view);
    if (header_pending) {
      header_pending = false;
      width = cells.size();
      if (header != nullptr) {
        header->clear();
        for (auto c : cells) header->emplace_back(trim(c));
      }
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw SchemaError(path.string() + ": row " + std::to_string(rows.size()) + " (line " +
                        std::to_string(line_no) + ") has " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(width));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], path, line_no, c);
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return out;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& data,
                      const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path.string() + ": cannot open for writing");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << format_double(data(i, j));
    out << '\n';
  }
  if (!out) throw SchemaError(path.string() + ": write failed");
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir, bool with_metric) {
  DatasetPaths p{dir / "inputs.csv", dir / "outputs.csv", dir / "gradients.csv", std::nullopt};
  if (with_metric) p.metric = dir / "metric.csv";
  return p;
}

GradientDataset read_dataset(const DatasetPaths& paths) {
  GradientDataset ds;
  std::vector<std::string> names;
  ds.X = read_csv_matrix(paths.inputs, true, &names);
  ds.Y = read_csv_matrix(paths.outputs, true);
  const Matrix grads = read_csv_matrix(paths.gradients, true);
  const Index m = ds.X.cols();
  const Index d = ds.Y.cols();
  if (ds.Y.rows() != ds.X.rows()) {
    throw SchemaError(paths.outputs.string() + ": has " + std::to_string(ds.Y.rows()) +
                      " rows but inputs have " + std::to_string(ds.X.rows()));
  }
  if (grads.rows() != ds.X.rows()) {
    throw SchemaError(paths.gradients.string() + ": has " + std::to_string(grads.rows()) +
                      " rows but inputs have " + std::to_string(ds.X.rows()));
  }
  if (grads.cols() != m * d) {
    throw SchemaError(paths.gradients.string() + ": row 0 has " + std::to_string(grads.cols()) +
                      " columns, expected d*m = " + std::to_string(m * d));
  }
  ds.dY.reserve(static_cast<std::size_t>(ds.X.rows()));
  for (Index i = 0; i < grads.rows(); ++i) {
    Matrix jac(d, m);
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < m; ++b) jac(a, b) = grads(i, a * m + b);
    }
    ds.dY.push_back(std::move(jac));
  }
  ds.spec = InputSpec::standard_normal(m);
  if (static_cast<Index>(names.size()) == m) ds.spec.names = names;
  if (paths.metric) {
    Matrix r = read_csv_matrix(*paths.metric, false);
    if (r.rows() != d || r.cols() != d) {
      throw SchemaError(paths.metric->string() + ": expected " + std::to_string(d) + "x" +
                        std::to_string(d) + " metric");
    }
    ds.metric = std::move(r);
  }
  ds.validate();
  return ds;
}

void write_dataset(const GradientDataset& ds, const DatasetPaths& paths) {
  ds.validate();
  const Index m = ds.input_dim();
  const Index d = ds.output_dim();
  std::vector<std::string> xh, yh, gh;
  for (Index j = 0; j < m; ++j) xh.push_back("x" + std::to_string(j + 1));
  for (Index j = 0; j < d; ++j) yh.push_back("y" + std::to_string(j + 1));
  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < m; ++b) gh.push_back("g_" + std::to_string(a + 1) + "_" + std::to_string(b + 1));
  }
  Matrix grads(ds.size(), m * d);
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < m; ++b) grads(i, a * m + b) = ds.dY[static_cast<std::size_t>(i)](a, b);
    }
  }
  write_csv_matrix(paths.inputs, ds.X, xh);
  write_csv_matrix(paths.outputs, ds.Y, yh);
  write_csv_matrix(paths.gradients, grads, gh);
  if (paths.metric && ds.metric) write_csv_matrix(*paths.metric, *ds.metric, {});
}

}  // namespace kas
