#include "kaslib/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "kaslib/error.hpp"
#include "kaslib/parallel.hpp"

namespace kas {

namespace {

struct FoldTask {
  std::size_t cell;
  int fold;
};

void summarize(ComparisonCell& c) {
  const double n = static_cast<double>(c.fold_scores.size());
  c.mean = std::accumulate(c.fold_scores.begin(), c.fold_scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : c.fold_scores) ss += (s - c.mean) * (s - c.mean);
  c.std = std::sqrt(ss / n);
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

const ComparisonCell& ComparisonReport::cell(Method method, int r) const {
  for (const auto& c : cells) {
    if (c.method == method && c.r == r) return c;
  }
  throw ArgumentError("comparison report has no " + method_name(method) + " cell for r = " + std::to_string(r));
}

std::vector<double> cv_score_as(const GradientDataset& ds, const FoldPlan& plan, int r,
                                const GpFitOptions& gp_options) {
  std::vector<double> scores;
  for (int fold = 0; fold < plan.k; ++fold) {
    scores.push_back(holdout_rrmse(ds.subset(plan.train_indices(fold)), ds.subset(plan.test_indices(fold)),
                                   Method::as, r, std::nullopt, gp_options));
  }
  return scores;
}

ComparisonReport compare(const GradientDataset& ds, const TuneConfig& cfg, const MeasureTemplate& measure,
                         const std::vector<int>& rs, const std::optional<GradientDataset>& test) {
  if (rs.empty()) throw ArgumentError("compare: need at least one r");
  if (test) {
    test->validate();
    if (test->input_dim() != ds.input_dim() || test->output_dim() != ds.output_dim()) {
      throw DimensionError("compare: test set dimensions differ from the training set");
    }
  }

  ComparisonReport report;
  report.tuning = grid_search(ds, cfg, measure);
  report.folds = cfg.folds;
  report.seed = cfg.seed;
  report.fold_seed = report.tuning.fold_seed;
  report.features = cfg.features;
  report.train_samples = ds.size();
  report.test_samples = test ? test->size() : 0;
  report.input_dim = ds.input_dim();
  report.output_dim = ds.output_dim();

  const FoldPlan plan = kfold(ds.size(), cfg.folds, report.fold_seed);
  std::optional<FeatureMap> fm;
  if (report.tuning.best) fm = report.tuning.best->feature_map;

  for (Method method : {Method::as, Method::kas}) {
    for (int r : rs) {
      ComparisonCell c;
      c.method = method;
      c.r = r;
      if (r < 1) {
        c.available = false;
        c.reason = "r must be at least 1";
      } else if (method == Method::as && r >= ds.input_dim()) {
        c.available = false;
        c.reason = "r must be smaller than the input dimension " + std::to_string(ds.input_dim());
      } else if (method == Method::kas && !fm) {
        c.available = false;
        c.reason = "tuning found no feature map with mean score below 1";
      } else if (method == Method::kas && r >= cfg.features) {
        c.available = false;
        c.reason = "r must be smaller than the feature dimension";
      }
      report.cells.push_back(std::move(c));
    }
  }

  // One task per (cell, fold); fold == k stands for the held-out test fit.
  std::vector<FoldTask> tasks;
  const int per_cell = cfg.folds + (test ? 1 : 0);
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    ComparisonCell& c = report.cells[i];
    if (!c.available) continue;
    int first = 0;
    if (c.method == Method::kas && c.r == cfg.r) {
      // Same map, folds and GP options as the winning grid point.
      c.fold_scores = report.tuning.points[report.tuning.best->index].fold_scores;
      first = cfg.folds;
    }
    for (int f = first; f < per_cell; ++f) tasks.push_back({i, f});
  }
  std::vector<double> results(tasks.size(), 0.0);
  std::vector<std::string> failures(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
    const ComparisonCell& c = report.cells[tasks[t].cell];
    const int f = tasks[t].fold;
    const std::optional<FeatureMap> map = c.method == Method::kas ? fm : std::nullopt;
    try {
      if (f < cfg.folds) {
        results[t] = holdout_rrmse(ds.subset(plan.train_indices(f)), ds.subset(plan.test_indices(f)), c.method,
                                   c.r, map, cfg.gp);
      } else {
        results[t] = holdout_rrmse(ds, *test, c.method, c.r, map, cfg.gp);
      }
    } catch (const Error& e) {
      failures[t] = (f < cfg.folds ? "fold " + std::to_string(f) : std::string("test set")) + ": " + e.what();
    }
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ComparisonCell& c = report.cells[tasks[t].cell];
    if (!failures[t].empty()) {
      if (c.available) {
        c.available = false;
        c.reason = failures[t];
      }
      continue;
    }
    if (tasks[t].fold < cfg.folds) {
      c.fold_scores.push_back(results[t]);
    } else {
      c.test_rrmse = results[t];
    }
  }
  for (auto& c : report.cells) {
    if (c.available) {
      summarize(c);
      spdlog::debug("{} r={}: mean RRMSE {} (std {})", method_name(c.method), c.r, c.mean, c.std);
    } else {
      c.fold_scores.clear();
      c.test_rrmse.reset();
    }
  }
  return report;
}

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json j;
    j["method"] = method_name(c.method);
    j["r"] = c.r;
    j["available"] = c.available;
    if (c.available) {
      j["fold_scores"] = c.fold_scores;
      j["mean"] = c.mean;
      j["std"] = c.std;
      j["test_rrmse"] = optional_number(c.test_rrmse);
    } else {
      j["reason"] = c.reason;
    }
    cells.push_back(std::move(j));
  }
  nlohmann::json meta;
  if (!report.benchmark.empty()) meta["benchmark"] = report.benchmark;
  meta["folds"] = report.folds;
  meta["seed"] = report.seed;
  meta["fold_seed"] = report.fold_seed;
  meta["features"] = report.features;
  meta["measure"] = family_name(report.tuning.family);
  meta["train_samples"] = report.train_samples;
  meta["test_samples"] = report.test_samples;
  meta["input_dim"] = report.input_dim;
  meta["output_dim"] = report.output_dim;
  return {{"metadata", meta}, {"cells", cells}, {"tuning", to_json(report.tuning, false)}};
}

std::string to_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "method,r,available,mean,std,test_rrmse,folds\n";
  for (const auto& c : report.cells) {
    out << method_name(c.method) << ',' << c.r << ',' << (c.available ? "true" : "false") << ',';
    if (c.available) {
      out << format_double(c.mean) << ',' << format_double(c.std) << ','
          << (c.test_rrmse ? format_double(*c.test_rrmse) : std::string());
    } else {
      out << ",,";
    }
    out << ',' << report.folds << '\n';
  }
  return out.str();
}

SummaryPlot summary_plot_data(const Surrogate& s, const Matrix& x, const Matrix& y, int grid, Index output) {
  if (s.subspace.r != 1) {
    throw UnsupportedError("summary plot: only one-dimensional surrogates can be plotted (r = " +
                           std::to_string(s.subspace.r) + ")");
  }
  if (grid < 1) throw ArgumentError("summary plot: grid needs at least one point");
  if (x.rows() != y.rows()) throw DimensionError("summary plot: inputs and targets differ in row count");
  if (x.rows() == 0) throw ArgumentError("summary plot: need at least one test point");
  if (output < 0 || output >= y.cols() || output >= s.gp.targets().cols()) {
    throw DimensionError("summary plot: output index out of range");
  }

  const Vector coords = reduced_coordinates(s, x).col(0);
  SummaryPlot plot;
  for (Index i = 0; i < coords.size(); ++i) plot.scatter.push_back({coords[i], y(i, output)});

  const double lo = coords.minCoeff();
  const double hi = coords.maxCoeff();
  Matrix g(grid, 1);
  for (int i = 0; i < grid; ++i) g(i, 0) = grid == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (grid - 1);
  const GpBatchPrediction pred = s.gp.predict(g);
  for (int i = 0; i < grid; ++i) {
    const double mean = pred.means(i, output);
    const double sd = std::sqrt(pred.variances[i]);
    plot.band.push_back({g(i, 0), mean, mean - sd, mean + sd});
  }
  return plot;
}

std::string to_csv(const SummaryPlot& plot) {
  std::ostringstream out;
  out << "coord,kind,value\n";
  for (const auto& p : plot.scatter) out << format_double(p.coord) << ",scatter," << format_double(p.value) << '\n';
  for (const auto& b : plot.band) {
    const std::string c = format_double(b.coord);
    out << c << ",mean," << format_double(b.mean) << '\n';
    out << c << ",lo," << format_double(b.lo) << '\n';
    out << c << ",hi," << format_double(b.hi) << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ArgumentError("failed writing " + path.string());
}

}  // namespace kas
