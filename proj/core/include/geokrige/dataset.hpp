#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "geokrige/geometry.hpp"

namespace geokrige {

struct ObservedPoint {
  int point_id = 0;
  Location loc;
  double value = 0.0;
  int variable_id = 0;
};

/// A flat collection of point observations. Multi-variable data lives in one
/// dataset distinguished by variable_id; point_id is unique per variable.
class SpatialDataset {
 public:
  SpatialDataset() = default;
  explicit SpatialDataset(std::vector<ObservedPoint> points)
      : points_(std::move(points)) {}

  void add(const ObservedPoint& p) { points_.push_back(p); }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const ObservedPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<ObservedPoint>& points() const { return points_; }

  std::vector<int> variable_ids() const {
    std::vector<int> ids;
    std::unordered_set<int> seen;
    for (const auto& p : points_) {
      if (seen.insert(p.variable_id).second) ids.push_back(p.variable_id);
    }
    return ids;
  }

  SpatialDataset filter_variable(int variable_id) const {
    std::vector<ObservedPoint> out;
    for (const auto& p : points_) {
      if (p.variable_id == variable_id) out.push_back(p);
    }
    return SpatialDataset(std::move(out));
  }

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(points_.size());
    for (const auto& p : points_) v.push_back(p.value);
    return v;
  }

  double mean_value() const {
    if (points_.empty()) throw std::invalid_argument("mean of empty dataset");
    double s = 0.0;
    for (const auto& p : points_) s += p.value;
    return s / static_cast<double>(points_.size());
  }

  /// Sample variance with the n-1 denominator; needs at least two points.
  double value_variance() const {
    if (points_.size() < 2)
      throw std::invalid_argument("variance needs at least two points");
    const double m = mean_value();
    double ss = 0.0;
    for (const auto& p : points_) ss += (p.value - m) * (p.value - m);
    return ss / static_cast<double>(points_.size() - 1);
  }

  /// point_id must be unique within each variable; throws otherwise.
  void validate_ids() const {
    std::unordered_set<long long> seen;
    for (const auto& p : points_) {
      const long long key =
          (static_cast<long long>(p.variable_id) << 32) ^
          static_cast<unsigned int>(p.point_id);
      if (!seen.insert(key).second)
        throw std::invalid_argument(
            "duplicate point_id " + std::to_string(p.point_id) +
            " for variable " + std::to_string(p.variable_id));
    }
  }

 private:
  std::vector<ObservedPoint> points_;
};

}  // namespace geokrige
