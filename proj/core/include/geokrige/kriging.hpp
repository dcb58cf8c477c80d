#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "geokrige/dataset.hpp"
#include "geokrige/lmc.hpp"
#include "geokrige/spatial_index.hpp"
#include "geokrige/variogram.hpp"

namespace geokrige {

struct NeighborhoodSpec {
  std::size_t max_points = 50;
  double max_radius_m = 1000.0;
  std::size_t min_points = 1;
};

struct KrigingPrediction {
  Location target;
  int variable_id = 0;
  double predicted_value = 0.0;
  double kriging_variance = 0.0;  // clipped at 0; tiny negatives are solver noise
  std::size_t n_neighbors_used = 0;
  double lagrange_multiplier = 0.0;
};

class KrigingError : public std::runtime_error {
 public:
  KrigingError(const std::string& what, std::size_t neighbors)
      : std::runtime_error(what), n_neighbors(neighbors) {}
  std::size_t n_neighbors;
};

/// Covariance implied by the variogram: total sill at distance 0, otherwise
/// psill * exp(-theta * h). The nugget is measurement-error variance, so it
/// appears only between a point and itself; system assembly places it on the
/// diagonal alone and predictions smooth rather than honor noisy data.
inline double covariance_from_variogram(const ExponentialVariogramModel& m,
                                        double h) {
  if (h == 0.0) return m.c0 + m.psill;
  return m.psill * std::exp(-m.theta * h);
}

/// Smooth-part covariance, used off the diagonal and for target-to-observation
/// terms (the target's measurement noise is independent of every observation's).
inline double signal_covariance(const ExponentialVariogramModel& m, double h) {
  return m.psill * std::exp(-m.theta * h);
}

/// Cross covariance of the coregionalization. Between two different variables
/// the nugget block applies at exactly coincident locations (shared record
/// noise); within one variable it applies only between a point and itself.
inline double lmc_covariance(const CoregionalizationModel& m, int i, int j,
                             double h, bool same_point) {
  const double structural = m.b_structure[i][j] * std::exp(-m.theta * h);
  if (i == j) return same_point ? m.b_nugget[i][j] + m.b_structure[i][j] : structural;
  return h == 0.0 ? m.b_nugget[i][j] + structural : structural;
}

/// Ordinary kriging at one target from the indexed observations: neighbors
/// are the max_points nearest within max_radius_m; fewer than min_points
/// throws KrigingError carrying the count. A singular system caused by
/// duplicate locations is retried with duplicates averaged into one
/// pseudo-observation.
KrigingPrediction ordinary_krige(const SpatialIndex& obs,
                                 const ExponentialVariogramModel& model,
                                 const Location& target,
                                 const NeighborhoodSpec& nbhd);

/// Ordinary co-kriging of target_variable (0..2) under the coregionalization.
/// Neighbors are selected per variable with the same spec; the target variable
/// needs min_points, the others may contribute any number including zero
/// (a variable with no neighbors simply drops out with its constraint).
KrigingPrediction cokrige(const std::array<const SpatialIndex*, 3>& obs,
                          const CoregionalizationModel& model,
                          const Location& target, int target_variable,
                          const NeighborhoodSpec& nbhd);

struct KrigingOutcome {
  bool ok = false;
  KrigingPrediction pred{};
  std::string error;
  std::size_t n_neighbors = 0;
};

/// All three variables predicted from one factorization of the shared block
/// system. Per-variable failures are reported in place, not thrown.
std::array<KrigingOutcome, 3> cokrige_all(const std::array<const SpatialIndex*, 3>& obs,
                                          const CoregionalizationModel& model,
                                          const Location& target,
                                          const NeighborhoodSpec& nbhd);

/// Order-preserving batch prediction; per-target failures are isolated in the
/// outcome rather than aborting the batch.
std::vector<KrigingOutcome> krige_batch(const SpatialIndex& obs,
                                        const ExponentialVariogramModel& model,
                                        const std::vector<Location>& targets,
                                        const NeighborhoodSpec& nbhd);
std::vector<KrigingOutcome> krige_batch(const SpatialDataset& obs,
                                        const ExponentialVariogramModel& model,
                                        const std::vector<Location>& targets,
                                        const NeighborhoodSpec& nbhd);

std::vector<std::array<KrigingOutcome, 3>> cokrige_batch(
    const std::array<const SpatialIndex*, 3>& obs, const CoregionalizationModel& model,
    const std::vector<Location>& targets, const NeighborhoodSpec& nbhd);

}  // namespace geokrige
