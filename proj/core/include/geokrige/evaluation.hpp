#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "geokrige/geometry.hpp"

namespace geokrige {

/// Four ascending cut points splitting values into categories 1..5.
/// A value equal to a cut belongs to the lower category.
struct QuintileBreaks {
  std::array<double, 4> cuts{};
};

/// Linear-interpolation percentile (the common statistical default: with the
/// sorted sample x[0..n-1], p maps to position (n-1)*p). values is copied.
double percentile(std::vector<double> values, double p);

/// Empirical 20/40/60/80th percentile breaks. Throws std::invalid_argument
/// with fewer than five distinct values.
QuintileBreaks quintile_breaks(const std::vector<double>& values);

inline int quintile_category(const QuintileBreaks& breaks, double v) {
  int cat = 1;
  for (double c : breaks.cuts) cat += c < v ? 1 : 0;
  return cat;
}

struct ReliabilityResult {
  double prop_correct = 0.0;
  double prop_correct_or_neighbor = 0.0;  // |category difference| <= 1
};

/// Categorize both series with the same breaks and compare elementwise.
/// Throws std::invalid_argument on a length mismatch or empty input.
ReliabilityResult reliability(const std::vector<double>& predicted,
                              const std::vector<double>& truth,
                              const QuintileBreaks& breaks);

struct PointSummary {
  int point_id = 0;
  Location loc;
  double true_value = 0.0;
  int true_quintile = 0;
  double mean_prediction = 0.0;
  double bias = 0.0;          // (mean prediction - true) / sd_true
  double empirical_se = 0.0;  // sample SD of the predictions (n-1 denominator)
  double mse = 0.0;           // mean squared error in raw units
  double prop_correct = 0.0;
  double prop_correct_or_neighbor = 0.0;
  std::size_t n_replications = 0;
};

/// Per-point metrics over replicated predictions of one true value; needs at
/// least two predictions. sd_true is the SD unit for the bias.
PointSummary point_metrics(const std::vector<double>& predictions,
                           double true_value, double sd_true,
                           const QuintileBreaks& breaks);

struct MetricAggregate {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
};

struct ScenarioSummary {
  MetricAggregate prop_correct;
  MetricAggregate prop_correct_or_neighbor;
  MetricAggregate bias;      // signed
  MetricAggregate bias_abs;  // |per-point bias|, regression-to-mean magnitude
  MetricAggregate empirical_se;
  MetricAggregate mse;
  std::size_t n_points = 0;
};

/// Aggregates are plain mean/SD/median over the point rows and can be
/// recomputed exactly from a dumped point summary.
ScenarioSummary summarize_points(const std::vector<PointSummary>& points);

enum class IndexMode { sum, mean };

/// Combined index over per-variable predictions; a missing entry throws.
double build_index(const std::vector<std::optional<double>>& per_variable,
                   IndexMode mode);

}  // namespace geokrige
