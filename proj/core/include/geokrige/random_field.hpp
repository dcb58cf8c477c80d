#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "geokrige/dataset.hpp"
#include "geokrige/variogram.hpp"

namespace geokrige {

/// A zero-mean stationary Gaussian field realized on a square grid with
/// spacing resolution_m, node (ix, iy) at (ix*res, iy*res). values holds
/// smooth field plus nugget noise (i.i.d. N(0, c0) per node); smooth_values
/// keeps the noise-free surface for diagnostics. Immutable once returned;
/// concurrent reads are safe.
struct FieldRealization {
  double extent_m = 0.0;
  double resolution_m = 0.0;
  int n_side = 0;  // floor(extent/res) + 1
  ExponentialVariogramModel model;
  std::uint64_t seed = 0;
  std::vector<double> values;         // row-major, node = iy * n_side + ix
  std::vector<double> smooth_values;

  int node_count() const { return n_side * n_side; }
  Location node_location(int node) const {
    return {(node % n_side) * resolution_m, (node / n_side) * resolution_m};
  }
};

/// Three fields on one grid with pairwise correlation r, mixed from
/// independent components by the Cholesky factor of the equicorrelation
/// matrix. Marginally each field follows `model`.
struct MultiFieldRealization {
  std::array<FieldRealization, 3> fields;
  double r = 0.0;
  std::uint64_t seed = 0;
};

/// Simulates via circulant embedding (torus wrapping at twice the grid span,
/// one doubling retry) with an exact dense Cholesky fallback for grids of at
/// most 4096 nodes. Throws std::runtime_error when the embedding stays
/// indefinite and the grid is too large for Cholesky.
FieldRealization simulate_grf(double extent_m, double resolution_m,
                              const ExponentialVariogramModel& model,
                              std::uint64_t seed);

/// r in [0, 1); throws std::invalid_argument otherwise.
MultiFieldRealization simulate_multivariate_grf(double extent_m,
                                                double resolution_m,
                                                const ExponentialVariogramModel& model,
                                                double r, std::uint64_t seed);

/// n distinct node ids drawn uniformly without replacement, intended to be
/// fixed once per scenario and excluded from observation sampling.
std::vector<int> select_test_nodes(const FieldRealization& field, std::size_t n,
                                   std::uint64_t seed);

/// Dataset view of specific nodes (values taken from the field).
SpatialDataset dataset_from_nodes(const FieldRealization& field,
                                  const std::vector<int>& nodes,
                                  int variable_id = 0);

SpatialDataset select_test_points(const FieldRealization& field, std::size_t n,
                                  std::uint64_t seed);

/// n distinct non-reserved nodes drawn uniformly without replacement; node id
/// doubles as point_id. Throws std::invalid_argument when n exceeds the
/// number of eligible nodes.
SpatialDataset sample_observations(const FieldRealization& field, std::size_t n,
                                   std::uint64_t seed,
                                   const std::vector<int>& reserved_nodes = {},
                                   int variable_id = 0);

}  // namespace geokrige
