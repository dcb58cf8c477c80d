#pragma once

#include <cmath>

namespace geokrige {

/// Planar coordinates in meters. All geometry in this library is Euclidean;
/// geographic inputs must be projected before they get here.
struct Location {
  double x = 0.0;
  double y = 0.0;
};

inline bool same_location(const Location& a, const Location& b) {
  return a.x == b.x && a.y == b.y;
}

inline double squared_distance(const Location& a, const Location& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Euclidean distance. Every distance comparison in the library goes through
/// this exact expression so index queries and linear scans agree bit for bit.
inline double distance(const Location& a, const Location& b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace geokrige
