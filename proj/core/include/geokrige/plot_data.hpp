#pragma once

// Tidy long-format CSV emission for downstream plotting: empirical-variogram
// curves with the fitted model overlaid, per-point bias against the true
// value across scenario runs, and reliability grouped by true quintile.

#include <string>
#include <vector>

namespace geokrige {

struct PlotDataRequest {
  // One of: variogram, bias_by_range, quintile_reliability.
  std::string kind;
  // variogram: one single-variable points CSV.
  // bias_by_range: one or more scenario output directories.
  // quintile_reliability: one scenario output directory.
  std::vector<std::string> inputs;
  // Row filter for kinds that read scenario outputs.
  std::string method = "univariate";
  // Empirical-variogram settings for the variogram kind.
  double max_dist_m = 1000.0;
  int bins = 15;
  bool fit_nugget = true;
  std::string out_path;
};

/// Writes the requested CSV; throws ConfigError for an unknown kind or bad
/// request shape and DataError for unreadable or ill-formed inputs.
void emit_plot_data(const PlotDataRequest& req);

}  // namespace geokrige
