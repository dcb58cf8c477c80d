#include "geokrige/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geokrige {

SpatialIndex::SpatialIndex(const SpatialDataset& dataset) : dataset_(&dataset) {
  if (dataset.empty())
    throw std::invalid_argument("cannot build a spatial index over an empty dataset");

  double max_x = dataset[0].loc.x, max_y = dataset[0].loc.y;
  min_x_ = max_x;
  min_y_ = max_y;
  for (const auto& p : dataset.points()) {
    min_x_ = std::min(min_x_, p.loc.x);
    min_y_ = std::min(min_y_, p.loc.y);
    max_x = std::max(max_x, p.loc.x);
    max_y = std::max(max_y, p.loc.y);
  }

  // Aim for order-one points per cell; degenerate extents fall back to one cell.
  const double span_x = max_x - min_x_;
  const double span_y = max_y - min_y_;
  const double area = span_x * span_y;
  const double n = static_cast<double>(dataset.size());
  cell_ = area > 0.0 ? std::sqrt(area / n) : std::max(span_x, span_y);
  if (!(cell_ > 0.0)) cell_ = 1.0;

  nx_ = static_cast<int>(std::floor(span_x / cell_)) + 1;
  ny_ = static_cast<int>(std::floor(span_y / cell_)) + 1;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int cx = cell_of(dataset[i].loc.x, min_x_, nx_);
    const int cy = cell_of(dataset[i].loc.y, min_y_, ny_);
    buckets_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(static_cast<int>(i));
  }
}

std::vector<Neighbor> SpatialIndex::neighbors_within(const Location& center,
                                                     double radius,
                                                     std::size_t max_count) const {
  std::vector<Neighbor> out;
  if (!(radius >= 0.0)) return out;

  // Clamp in floating point before converting so huge or infinite radii are safe.
  const int cx0 = cell_of(center.x - radius, min_x_, nx_);
  const int cx1 = cell_of(center.x + radius, min_x_, nx_);
  const int cy0 = cell_of(center.y - radius, min_y_, ny_);
  const int cy1 = cell_of(center.y + radius, min_y_, ny_);

  const auto& pts = dataset_->points();
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      for (int i : buckets_[static_cast<std::size_t>(cy) * nx_ + cx]) {
        const auto& p = pts[static_cast<std::size_t>(i)];
        const double d = distance(center, p.loc);
        if (d <= radius)
          out.push_back({static_cast<std::size_t>(i), p.point_id, p.variable_id, d});
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.point_id != b.point_id) return a.point_id < b.point_id;
    return a.variable_id < b.variable_id;
  });
  if (max_count > 0 && out.size() > max_count) out.resize(max_count);
  return out;
}

}  // namespace geokrige
