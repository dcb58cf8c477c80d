#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "geokrige/dataset.hpp"

namespace geokrige {

struct VariogramBin {
  double lag_center = 0.0;
  // Average distance of the pairs that landed in the bin, 0 when empty. Model
  // fits evaluate at this abscissa: on gridded or clustered data the pairs can
  // sit far from the geometric bin center, which otherwise biases the fit.
  double mean_dist = 0.0;
  double gamma_hat = 0.0;
  long long n_pairs = 0;
};

/// Binned method-of-moments semi-variogram. Bins partition (0, max_dist] into
/// n_bins equal-width intervals, left-open right-closed; pairs at distance 0
/// are excluded from the bins and reported separately as a nugget diagnostic.
struct EmpiricalVariogram {
  std::vector<VariogramBin> bins;  // always n_bins entries; empty bins have n_pairs == 0
  double max_dist = 0.0;
  int n_bins = 0;

  long long zero_distance_pairs = 0;
  double zero_distance_gamma = 0.0;  // mean half squared difference at h == 0

  /// Set when no pair fell inside (0, max_dist]; the bins are all empty.
  bool all_pairs_beyond_max_dist = false;

  // Cross-variogram bookkeeping (unused for direct variograms).
  bool covariance_based = false;      // heterotopic estimator was used
  bool cross_sill_extrapolated = false;
  double cross_c0_hat = 0.0;          // lag-0 cross covariance the conversion used

  long long pairs_used() const {
    long long n = 0;
    for (const auto& b : bins) n += b.n_pairs;
    return n;
  }
};

/// Bin index for a pair distance, -1 when the pair does not bin (d <= 0 or
/// d > max_dist). Bin b covers (b*w, (b+1)*w] with w = max_dist / n_bins.
inline int lag_bin_index(double d, double max_dist, int n_bins) {
  if (!(d > 0.0) || d > max_dist) return -1;
  const double w = max_dist / n_bins;
  int b = static_cast<int>(std::ceil(d / w)) - 1;
  if (b < 0) b = 0;
  if (b >= n_bins) b = n_bins - 1;
  return b;
}

/// Exponential semi-variogram gamma(h) = c0 + psill * (1 - exp(-theta*h)) for
/// h > 0, gamma(0) = 0 exactly. c0 >= 0, psill > 0, theta > 0.
struct ExponentialVariogramModel {
  double c0 = 0.0;     // nugget
  double psill = 1.0;  // partial sill
  double theta = 1.0;  // inverse scale, 1/m
};

inline double model_gamma(const ExponentialVariogramModel& m, double h) {
  if (h == 0.0) return 0.0;
  return m.c0 + m.psill * (1.0 - std::exp(-m.theta * h));
}

inline double total_sill(const ExponentialVariogramModel& m) {
  return m.c0 + m.psill;
}

/// Distance at which the model reaches all but 5% of the partial sill,
/// log(psill / 0.05) / theta. Negative when psill < 0.05 by construction.
inline double practical_range(const ExponentialVariogramModel& m) {
  return std::log(m.psill / 0.05) / m.theta;
}

/// Conventional exponential range, 3 / theta (range = 3 * scale).
inline double range3(const ExponentialVariogramModel& m) {
  return 3.0 / m.theta;
}

/// Linear model of coregionalization for three variables sharing one
/// exponential scale: gamma_ij(h) = Bn[i][j] + Bs[i][j]*(1 - exp(-theta*h))
/// for h > 0. Both B matrices are symmetric positive semidefinite.
struct CoregionalizationModel {
  double theta = 1.0;
  std::array<std::array<double, 3>, 3> b_nugget{};
  std::array<std::array<double, 3>, 3> b_structure{};
};

inline double model_gamma(const CoregionalizationModel& m, int i, int j, double h) {
  if (h == 0.0) return 0.0;
  return m.b_nugget[i][j] + m.b_structure[i][j] * (1.0 - std::exp(-m.theta * h));
}

enum class CrossMode {
  auto_detect,  // collocated when the two datasets share all locations
  collocated,   // classic estimator on location-matched pairs
  covariance,   // gamma_ij(h) = C_ij(0) - C_ij(h) from the sample cross covariance
};

/// Matheron estimator over all point pairs of ds within (0, max_dist].
/// Throws std::invalid_argument for fewer than two points or bad bin setup.
EmpiricalVariogram empirical_variogram(const SpatialDataset& ds, double max_dist,
                                       int n_bins);

/// Cross semi-variogram between two variables. Fully collocated inputs use the
/// classic product-of-increments estimator; anything else falls back to the
/// covariance route (see EmpiricalVariogram flags).
EmpiricalVariogram empirical_cross_variogram(const SpatialDataset& ds_i,
                                             const SpatialDataset& ds_j,
                                             double max_dist, int n_bins,
                                             CrossMode mode = CrossMode::auto_detect);

}  // namespace geokrige
