#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kaslib/surrogate.hpp"
#include "kaslib/tuning.hpp"

namespace kas {

struct ComparisonCell {
  Method method = Method::as;
  int r = 1;
  bool available = true;
  std::string reason;  // why the cell is unavailable
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std = 0.0;  // population std over folds
  std::optional<double> test_rrmse;  // surrogate fit on all training data, scored on the test set
};

struct ComparisonReport {
  std::vector<ComparisonCell> cells;  // AS cells first, each in the order of rs
  TuneReport tuning;
  int folds = 0;
  std::uint64_t seed = 0;
  std::uint64_t fold_seed = 0;
  Index features = 0;
  Index train_samples = 0;
  Index test_samples = 0;
  Index input_dim = 0;
  Index output_dim = 0;
  std::string benchmark;  // informational, may be empty

  const ComparisonCell& cell(Method method, int r) const;
};

/// CV score of the plain active-subspace surrogate on the given fold plan.
std::vector<double> cv_score_as(const GradientDataset& ds, const FoldPlan& plan, int r,
                                const GpFitOptions& gp_options = {});

/// Tunes the KAS feature map on `ds`, then scores AS and KAS surrogates for
/// every r with the same folds. With a test set, both surrogates are also
/// refit on all of `ds` and scored on it.
ComparisonReport compare(const GradientDataset& ds, const TuneConfig& cfg, const MeasureTemplate& measure,
                         const std::vector<int>& rs, const std::optional<GradientDataset>& test = std::nullopt);

nlohmann::json to_json(const ComparisonReport& report);
/// method,r,available,mean,std,test_rrmse,folds
std::string to_csv(const ComparisonReport& report);

struct SummaryPlot {
  struct Point {
    double coord;
    double value;
  };
  struct Band {
    double coord;
    double mean;
    double lo;
    double hi;
  };
  std::vector<Point> scatter;
  std::vector<Band> band;  // mean +/- one posterior standard deviation
};

/// Sufficient summary plot data for a one-dimensional surrogate: test
/// targets against the reduced coordinate, and the GP band on an even grid
/// spanning the projected range. Multi-output surrogates plot `output`.
SummaryPlot summary_plot_data(const Surrogate& s, const Matrix& x, const Matrix& y, int grid = 200,
                              Index output = 0);

/// CSV with header coord,kind,value and kind in {scatter, mean, lo, hi}.
std::string to_csv(const SummaryPlot& plot);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kas
