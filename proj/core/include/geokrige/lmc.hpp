#pragma once

#include <array>

#include "geokrige/variogram.hpp"

namespace geokrige {

struct LmcDiagnostics {
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  bool cross_sill_extrapolated = false;  // any input cross curve was
};

struct LmcFit {
  CoregionalizationModel model;
  LmcDiagnostics diag;
};

/// Three-variable coregionalization sharing one exponential scale, built with
/// equal cross correlation r: Bn = c0 * R, Bs = psill * R, R the 3x3
/// equicorrelation matrix. This is the generating model of the multivariate
/// simulations, so fixed-variogram co-kriging uses it directly.
CoregionalizationModel intrinsic_lmc(const ExponentialVariogramModel& m, double r);

/// Alternating weighted least squares fit of the coregionalization:
/// with theta fixed, each B entry solves its own linear WLS against the
/// matching curve, both B matrices are projected onto the PSD cone by
/// eigenvalue clipping, then theta is refreshed by a one-dimensional search
/// on the pooled residual. Stops at a relative objective change below 1e-8.
///
/// direct holds the three direct variograms; cross holds pairs (0,1), (0,2),
/// (1,2). Curves with no nonempty bin contribute nothing and their entries
/// stay at zero.
LmcFit fit_lmc(const std::array<EmpiricalVariogram, 3>& direct,
               const std::array<EmpiricalVariogram, 3>& cross,
               double theta_initial, int max_iterations = 500);

}  // namespace geokrige
