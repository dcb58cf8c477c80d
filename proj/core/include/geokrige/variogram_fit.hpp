#pragma once

#include <string>
#include <vector>

#include "geokrige/variogram.hpp"

namespace geokrige {

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;  // weighted sum of squared residuals at the solution
  int n_bins_used = 0;
  bool fallback_init_used = false;
};

struct VariogramFit {
  ExponentialVariogramModel model;
  FitDiagnostics diag;
};

/// Starting point used by the harness: half the first nonempty bin as nugget,
/// the sample variance as sill, and a scale of one sixth of max_dist.
ExponentialVariogramModel default_fit_initial(const EmpiricalVariogram& emp,
                                              double data_variance);

/// Alternative start used when a fit fails validation: nugget-free, sill from
/// the tail of the empirical curve, scale of one twelfth of max_dist.
ExponentialVariogramModel fallback_fit_initial(const EmpiricalVariogram& emp,
                                               double data_variance);

/// Weighted least squares fit of the exponential model to the nonempty bins,
/// with weights n_pairs / lag^2. Gauss-Newton with Levenberg damping on
/// internally transformed parameters keeps c0 >= 0, psill > 0, theta > 0.
/// fit_nugget == false pins c0 to 0. Never throws past precondition checks:
/// hitting the iteration cap returns the best iterate flagged non-converged.
/// Throws std::invalid_argument when fewer than two bins are nonempty.
VariogramFit fit_exponential_wls(const EmpiricalVariogram& emp,
                                 const ExponentialVariogramModel& initial,
                                 bool fit_nugget = true, int max_iterations = 200);

struct ValidationLimits {
  double max_range_factor = 2.0;   // range3 vs max_dist
  double min_range_bins = 1.0;     // range3 vs bin width
  double max_sill_factor = 5.0;    // total sill vs data variance
  double max_nugget_share = 0.95;  // c0 vs total sill
};

struct ModelValidation {
  bool valid = true;
  std::vector<std::string> reasons;
};

/// Plausibility screen for a fitted model against the variogram it came from.
/// data_variance is the sample variance of the fitted values.
ModelValidation validate_model(const VariogramFit& fit,
                               const EmpiricalVariogram& emp,
                               double data_variance,
                               const ValidationLimits& limits = {});

/// Fit outcome after the validation screen and at most one retry from the
/// fallback initialization. The lower-objective fit wins and keeps its own
/// validity verdict; refit_used records that the retry happened at all.
struct ScreenedFit {
  VariogramFit fit;
  bool valid = true;
  bool refit_used = false;
};

ScreenedFit fit_exponential_screened(const EmpiricalVariogram& emp,
                                     double data_variance, bool fit_nugget,
                                     const ValidationLimits& limits = {});

}  // namespace geokrige
