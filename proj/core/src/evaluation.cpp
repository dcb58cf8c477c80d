#include "geokrige/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace geokrige {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

QuintileBreaks quintile_breaks(const std::vector<double>& values) {
  const std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() < 5)
    throw std::invalid_argument("quintile breaks need at least five distinct values");
  QuintileBreaks b;
  for (int k = 1; k <= 4; ++k)
    b.cuts[static_cast<std::size_t>(k - 1)] = percentile(values, 0.2 * k);
  return b;
}

ReliabilityResult reliability(const std::vector<double>& predicted,
                              const std::vector<double>& truth,
                              const QuintileBreaks& breaks) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("predicted and truth lengths differ");
  if (predicted.empty())
    throw std::invalid_argument("reliability of empty series");

  std::size_t correct = 0, near = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int qp = quintile_category(breaks, predicted[i]);
    const int qt = quintile_category(breaks, truth[i]);
    if (qp == qt) ++correct;
    if (std::abs(qp - qt) <= 1) ++near;
  }
  const double n = static_cast<double>(predicted.size());
  return {static_cast<double>(correct) / n, static_cast<double>(near) / n};
}

PointSummary point_metrics(const std::vector<double>& predictions,
                           double true_value, double sd_true,
                           const QuintileBreaks& breaks) {
  if (predictions.size() < 2)
    throw std::invalid_argument("point metrics need at least two replications");
  if (!(sd_true > 0.0))
    throw std::invalid_argument("sd_true must be positive");

  const double n = static_cast<double>(predictions.size());
  double mean = 0.0;
  for (double v : predictions) mean += v;
  mean /= n;

  double ss = 0.0, sse = 0.0;
  std::size_t correct = 0, near = 0;
  const int qt = quintile_category(breaks, true_value);
  for (double v : predictions) {
    ss += (v - mean) * (v - mean);
    sse += (v - true_value) * (v - true_value);
    const int qp = quintile_category(breaks, v);
    if (qp == qt) ++correct;
    if (std::abs(qp - qt) <= 1) ++near;
  }

  PointSummary s;
  s.true_value = true_value;
  s.true_quintile = qt;
  s.mean_prediction = mean;
  s.bias = (mean - true_value) / sd_true;
  s.empirical_se = std::sqrt(ss / (n - 1.0));
  s.mse = sse / n;
  s.prop_correct = static_cast<double>(correct) / n;
  s.prop_correct_or_neighbor = static_cast<double>(near) / n;
  s.n_replications = predictions.size();
  return s;
}

namespace {

MetricAggregate aggregate(std::vector<double> v) {
  MetricAggregate a;
  const double n = static_cast<double>(v.size());
  for (double x : v) a.mean += x;
  a.mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - a.mean) * (x - a.mean);
  a.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  a.median = percentile(std::move(v), 0.5);
  return a;
}

}  // namespace

ScenarioSummary summarize_points(const std::vector<PointSummary>& points) {
  if (points.empty())
    throw std::invalid_argument("no point summaries to aggregate");

  std::vector<double> correct, near, bias, bias_abs, se, mse;
  correct.reserve(points.size());
  for (const auto& p : points) {
    correct.push_back(p.prop_correct);
    near.push_back(p.prop_correct_or_neighbor);
    bias.push_back(p.bias);
    bias_abs.push_back(std::abs(p.bias));
    se.push_back(p.empirical_se);
    mse.push_back(p.mse);
  }

  ScenarioSummary s;
  s.prop_correct = aggregate(std::move(correct));
  s.prop_correct_or_neighbor = aggregate(std::move(near));
  s.bias = aggregate(std::move(bias));
  s.bias_abs = aggregate(std::move(bias_abs));
  s.empirical_se = aggregate(std::move(se));
  s.mse = aggregate(std::move(mse));
  s.n_points = points.size();
  return s;
}

double build_index(const std::vector<std::optional<double>>& per_variable,
                   IndexMode mode) {
  if (per_variable.empty())
    throw std::invalid_argument("index needs at least one variable");
  double sum = 0.0;
  for (std::size_t v = 0; v < per_variable.size(); ++v) {
    if (!per_variable[v].has_value())
      throw std::invalid_argument("variable " + std::to_string(v) +
                                  " missing from index input");
    sum += *per_variable[v];
  }
  return mode == IndexMode::sum ? sum
                                : sum / static_cast<double>(per_variable.size());
}

}  // namespace geokrige
