#include "kaslib/tuning.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "kaslib/error.hpp"
#include "kaslib/parallel.hpp"
#include "kaslib/random.hpp"
#include "kaslib/surrogate.hpp"

namespace kas {

namespace {

constexpr std::uint64_t kFoldStream = 0x666f6c64ULL;

std::vector<std::vector<double>> cartesian(const std::vector<std::vector<double>>& axes) {
  std::vector<std::vector<double>> out{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(out.size() * axis.size());
    for (const auto& prefix : out) {
      for (double v : axis) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::string describe(const std::vector<double>& h) {
  std::string s = "(";
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(h[i]);
  }
  return s + ")";
}

}  // namespace

MeasureFamily parse_measure_family(const std::string& name) {
  if (name == "gaussian") return MeasureFamily::gaussian;
  if (name == "mvn-diag") return MeasureFamily::mvn_diag;
  if (name == "laplace") return MeasureFamily::laplace;
  if (name == "beta") return MeasureFamily::beta;
  throw ArgumentError("unknown measure '" + name + "' (expected gaussian, mvn-diag, laplace or beta)");
}

std::string family_name(MeasureFamily family) {
  switch (family) {
    case MeasureFamily::gaussian: return "gaussian";
    case MeasureFamily::mvn_diag: return "mvn-diag";
    case MeasureFamily::laplace: return "laplace";
    case MeasureFamily::beta: return "beta";
  }
  return "gaussian";
}

std::vector<std::string> MeasureTemplate::hyperparameter_names() const {
  switch (family) {
    case MeasureFamily::gaussian: return {"variance"};
    case MeasureFamily::mvn_diag: return {"multiplier"};
    case MeasureFamily::laplace: return {"location", "scale"};
    case MeasureFamily::beta: return {"alpha", "beta"};
  }
  return {};
}

SpectralMeasure MeasureTemplate::instantiate(std::span<const double> h, Index input_dim) const {
  if (h.size() != hyperparameter_names().size()) {
    throw ArgumentError("measure " + family_name(family) + " takes " +
                        std::to_string(hyperparameter_names().size()) + " hyperparameters, got " +
                        std::to_string(h.size()));
  }
  SpectralMeasure m;
  switch (family) {
    case MeasureFamily::gaussian: m = GaussianMeasure{h[0]}; break;
    case MeasureFamily::mvn_diag: {
      std::vector<double> v = base_variances;
      if (v.empty()) v.assign(static_cast<std::size_t>(input_dim), 1.0);
      for (double& x : v) x *= h[0];
      m = MvnDiagMeasure{std::move(v)};
      break;
    }
    case MeasureFamily::laplace: m = LaplaceMeasure{h[0], h[1]}; break;
    case MeasureFamily::beta: m = BetaMeasure{h[0], h[1]}; break;
  }
  validate_measure(m, input_dim);
  return m;
}

std::vector<double> log_space(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw ArgumentError("log_space: need 0 < lo <= hi and at least one point");
  }
  if (points == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(points));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    v[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<std::vector<double>> default_grid(MeasureFamily family, int points, double lo, double hi) {
  const auto axis = log_space(lo, hi, points);
  switch (family) {
    case MeasureFamily::gaussian:
    case MeasureFamily::mvn_diag: return {axis};
    case MeasureFamily::laplace: return {{0.0}, axis};
    case MeasureFamily::beta: return {axis, axis};
  }
  return {axis};
}

void TuneConfig::validate(const MeasureTemplate& measure) const {
  if (grid.size() != measure.hyperparameter_names().size()) {
    throw ArgumentError("tuning grid has " + std::to_string(grid.size()) + " axes, measure " +
                        family_name(measure.family) + " needs " +
                        std::to_string(measure.hyperparameter_names().size()));
  }
  std::size_t total = 1;
  for (const auto& axis : grid) {
    if (axis.empty()) throw ArgumentError("tuning grid axes must be nonempty");
    total *= axis.size();
  }
  if (total > kMaxGridPoints) {
    throw ArgumentError("tuning grid has " + std::to_string(total) + " points, limit is " +
                        std::to_string(kMaxGridPoints));
  }
  if (folds < 2) throw ArgumentError("tuning needs at least 2 folds");
  if (!(tol >= 0.0)) throw ArgumentError("tuning tolerance must be nonnegative");
  if (r < 1) throw ArgumentError("tuning: r must be at least 1");
  if (features < 1) throw ArgumentError("tuning: feature count must be positive");
  if (sigma_f && !(*sigma_f > 0.0 && std::isfinite(*sigma_f))) {
    throw ArgumentError("tuning: sigma_f must be positive and finite");
  }
}

CvOutcome cv_score(const GradientDataset& ds, const FeatureMap& fm, const FoldPlan& plan, int r, double tol,
                   const GpFitOptions& gp_options) {
  if (plan.assignments.size() != static_cast<std::size_t>(ds.size())) {
    throw DimensionError("cv_score: fold plan covers " + std::to_string(plan.assignments.size()) +
                         " samples, dataset has " + std::to_string(ds.size()));
  }
  CvOutcome out;
  for (int fold = 0; fold < plan.k; ++fold) {
    double score = 0.0;
    try {
      score = holdout_rrmse(ds.subset(plan.train_indices(fold)), ds.subset(plan.test_indices(fold)), Method::kas,
                            r, fm, gp_options);
    } catch (const Error& e) {
      throw FitError("fold " + std::to_string(fold) + ": " + e.what());
    }
    out.scores.push_back(score);
    if (score > tol) {
      out.early_stopped = true;
      break;
    }
  }
  return out;
}

std::uint64_t fold_seed_for(std::uint64_t seed) { return derive_seed(seed, kFoldStream); }

double output_std(const GradientDataset& ds) {
  const Index n = ds.Y.size();
  if (n < 2) return 1.0;
  const double mean = ds.Y.mean();
  const double var = (ds.Y.array() - mean).square().sum() / static_cast<double>(n - 1);
  return var > 0.0 && std::isfinite(var) ? std::sqrt(var) : 1.0;
}

TuneReport grid_search(const GradientDataset& ds, const TuneConfig& cfg, const MeasureTemplate& measure) {
  ds.validate();
  cfg.validate(measure);
  const Index m = ds.input_dim();
  if (cfg.features <= m) {
    throw ArgumentError("tuning: feature dimension " + std::to_string(cfg.features) +
                        " must exceed the input dimension " + std::to_string(m));
  }

  TuneReport report;
  report.family = measure.family;
  report.hyperparameter_names = measure.hyperparameter_names();
  report.seed = cfg.seed;
  report.fold_seed = fold_seed_for(cfg.seed);
  report.folds = cfg.folds;
  report.tol = cfg.tol;
  report.features = cfg.features;
  report.r = cfg.r;
  report.sigma_f = cfg.sigma_f.value_or(output_std(ds));
  report.samples = ds.size();

  const FoldPlan plan = kfold(ds.size(), cfg.folds, report.fold_seed);
  const auto points = cartesian(cfg.grid);
  report.points.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    report.points[i].hyperparameters = points[i];
    report.points[i].seed = derive_seed(cfg.seed, i + 1);
    // Reject invalid measures up front rather than per worker.
    (void)measure.instantiate(points[i], m);
  }

  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    GridPointResult& pt = report.points[i];
    try {
      const FeatureMap fm = FeatureMap::random_fourier(m, cfg.features, report.sigma_f,
                                                       measure.instantiate(pt.hyperparameters, m), pt.seed);
      const CvOutcome cv = cv_score(ds, fm, plan, cfg.r, cfg.tol, cfg.gp);
      pt.fold_scores = cv.scores;
      pt.early_stopped = cv.early_stopped;
      if (!cv.early_stopped) {
        pt.mean_score = std::accumulate(cv.scores.begin(), cv.scores.end(), 0.0) /
                        static_cast<double>(cv.scores.size());
      }
    } catch (const Error& e) {
      pt.failure = e.what();
    }
    spdlog::debug("grid point {} {}: {} folds, mean {}{}", i, describe(pt.hyperparameters), pt.fold_scores.size(),
                  pt.mean_score ? *pt.mean_score : std::numeric_limits<double>::quiet_NaN(),
                  pt.failure.empty() ? "" : " failed: " + pt.failure);
  });

  double best = 1.0;
  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& pt = report.points[i];
    if (pt.mean_score && *pt.mean_score < best) {
      best = *pt.mean_score;
      winner = i;
    }
  }
  if (winner) {
    const auto& pt = report.points[*winner];
    report.best = TuneBest{*winner, pt.hyperparameters, best,
                           FeatureMap::random_fourier(m, cfg.features, report.sigma_f,
                                                      measure.instantiate(pt.hyperparameters, m), pt.seed)};
    spdlog::debug("tuning winner {} {} with mean RRMSE {}", *winner, describe(pt.hyperparameters), best);
  } else {
    spdlog::debug("tuning: no grid point beat the initial score of 1");
  }
  return report;
}

nlohmann::json to_json(const TuneReport& report, bool include_feature_map) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : report.points) {
    nlohmann::json p;
    p["hyperparameters"] = pt.hyperparameters;
    p["seed"] = pt.seed;
    p["fold_scores"] = pt.fold_scores;
    p["early_stopped"] = pt.early_stopped;
    p["mean_score"] = pt.mean_score ? nlohmann::json(*pt.mean_score) : nlohmann::json(nullptr);
    if (!pt.failure.empty()) p["failure"] = pt.failure;
    points.push_back(std::move(p));
  }
  nlohmann::json j;
  j["measure"] = family_name(report.family);
  j["hyperparameter_names"] = report.hyperparameter_names;
  j["seed"] = report.seed;
  j["fold_seed"] = report.fold_seed;
  j["folds"] = report.folds;
  j["tol"] = report.tol;
  j["features"] = report.features;
  j["r"] = report.r;
  j["sigma_f"] = report.sigma_f;
  j["samples"] = report.samples;
  j["points"] = std::move(points);
  if (report.best) {
    j["best"] = {{"index", report.best->index},
                 {"hyperparameters", report.best->hyperparameters},
                 {"mean_score", report.best->mean_score}};
    if (include_feature_map) j["best"]["feature_map"] = to_json(report.best->feature_map);
  } else {
    j["best"] = nullptr;
    j["outcome"] = "no grid point reached a mean score below 1";
  }
  return j;
}

}  // namespace kas
