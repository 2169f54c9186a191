#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kaslib/datasets.hpp"
#include "kaslib/featuremap.hpp"
#include "kaslib/gpr.hpp"

namespace kas {

enum class MeasureFamily { gaussian, mvn_diag, laplace, beta };

MeasureFamily parse_measure_family(const std::string& name);
std::string family_name(MeasureFamily family);

/// Spectral-measure family with its tunable hyperparameters:
///   gaussian  (variance)
///   mvn-diag  (multiplier applied to `base_variances`, all ones by default)
///   laplace   (location, scale)
///   beta      (alpha, beta)
struct MeasureTemplate {
  MeasureFamily family = MeasureFamily::gaussian;
  std::vector<double> base_variances;

  std::vector<std::string> hyperparameter_names() const;
  SpectralMeasure instantiate(std::span<const double> hyperparameters, Index input_dim) const;
};

std::vector<double> log_space(double lo, double hi, int points);

/// Log-spaced values per hyperparameter. The Laplace location is held at 0.
std::vector<std::vector<double>> default_grid(MeasureFamily family, int points = 12, double lo = 1e-3,
                                              double hi = 1e2);

inline constexpr std::size_t kMaxGridPoints = 144;

struct TuneConfig {
  std::vector<std::vector<double>> grid;  // one value list per hyperparameter
  int folds = 5;
  double tol = 0.8;
  Index features = 1000;
  int r = 1;
  std::optional<double> sigma_f;  // default: std of the training outputs
  std::uint64_t seed = 0;
  int threads = 1;
  GpFitOptions gp;

  void validate(const MeasureTemplate& measure) const;
};

struct CvOutcome {
  std::vector<double> scores;
  bool early_stopped = false;
};

/// n-fold cross-validated RRMSE of the KAS response surface built with `fm`.
/// Stops after the first fold whose score exceeds `tol`.
CvOutcome cv_score(const GradientDataset& ds, const FeatureMap& fm, const FoldPlan& plan, int r, double tol,
                   const GpFitOptions& gp_options = {});

struct GridPointResult {
  std::vector<double> hyperparameters;
  std::uint64_t seed = 0;
  std::vector<double> fold_scores;
  bool early_stopped = false;
  std::optional<double> mean_score;  // set only when every fold completed
  std::string failure;               // numerical failure message, if any
};

struct TuneBest {
  std::size_t index = 0;
  std::vector<double> hyperparameters;
  double mean_score = 1.0;
  FeatureMap feature_map;
};

struct TuneReport {
  MeasureFamily family = MeasureFamily::gaussian;
  std::vector<std::string> hyperparameter_names;
  std::vector<GridPointResult> points;
  std::optional<TuneBest> best;  // empty: no grid point beat the initial score of 1
  std::uint64_t seed = 0;
  std::uint64_t fold_seed = 0;
  int folds = 0;
  double tol = 0.0;
  Index features = 0;
  int r = 0;
  double sigma_f = 1.0;
  Index samples = 0;
};

/// Logarithmic grid search over the measure hyperparameters. For every grid
/// point a fresh (W, b) is drawn and scored with n-fold CV; the realization
/// with the lowest mean RRMSE below 1 wins. Early-stopped points never win.
TuneReport grid_search(const GradientDataset& ds, const TuneConfig& cfg, const MeasureTemplate& measure);

/// Seed of the fold partition used by grid_search for a given run seed.
std::uint64_t fold_seed_for(std::uint64_t seed);

/// Empirical standard deviation of all outputs; 1 when they are constant.
double output_std(const GradientDataset& ds);

nlohmann::json to_json(const TuneReport& report, bool include_feature_map = true);

}  // namespace kas
