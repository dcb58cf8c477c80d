#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "geokrige/dataset.hpp"
#include "geokrige/geometry.hpp"

namespace geokrige {

struct Neighbor {
  std::size_t index = 0;  // position in the indexed dataset
  int point_id = 0;
  int variable_id = 0;
  double dist = 0.0;
};

/// Uniform grid-bucket index over a dataset. Built once, then read-only;
/// concurrent queries from multiple threads are safe. Cell pruning is
/// conservative and the final radius test uses distance(), so results are
/// identical to a brute-force scan.
class SpatialIndex {
 public:
  /// Throws std::invalid_argument on an empty dataset.
  explicit SpatialIndex(const SpatialDataset& dataset);

  /// All points with distance(center, p) <= radius, sorted ascending by
  /// distance with ties broken by ascending point_id (then variable_id).
  /// If more than max_count qualify, the result is truncated to the
  /// max_count nearest. max_count == 0 means no truncation.
  std::vector<Neighbor> neighbors_within(const Location& center, double radius,
                                         std::size_t max_count = 0) const;

  /// Unsorted visitation of every point within radius; fn(index, distance).
  /// Same inclusion rule as neighbors_within, minus the sort, for pair loops.
  template <typename Fn>
  void for_each_within(const Location& center, double radius, Fn&& fn) const {
    if (!(radius >= 0.0)) return;
    const int cx0 = cell_of(center.x - radius, min_x_, nx_);
    const int cx1 = cell_of(center.x + radius, min_x_, nx_);
    const int cy0 = cell_of(center.y - radius, min_y_, ny_);
    const int cy1 = cell_of(center.y + radius, min_y_, ny_);
    const auto& pts = dataset_->points();
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        for (int i : buckets_[static_cast<std::size_t>(cy) * nx_ + cx]) {
          const double d = distance(center, pts[static_cast<std::size_t>(i)].loc);
          if (d <= radius) fn(static_cast<std::size_t>(i), d);
        }
      }
    }
  }

  const SpatialDataset& dataset() const { return *dataset_; }
  std::size_t size() const { return dataset_->size(); }

 private:
  const SpatialDataset* dataset_;
  double min_x_ = 0.0, min_y_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;

  int cell_of(double v, double min_v, int n) const {
    const double c = std::floor((v - min_v) / cell_);
    return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(n - 1)));
  }
};

}  // namespace geokrige
