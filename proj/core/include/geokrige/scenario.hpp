#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geokrige/config.hpp"
#include "geokrige/evaluation.hpp"
#include "geokrige/kriging.hpp"
#include "geokrige/random_field.hpp"
#include "geokrige/variogram_fit.hpp"

namespace geokrige {

enum class VariogramMode { estimated, fixed };
enum class MultivariateMode { off, collocated, heterotopic };

/// One simulation cell: a field simulated once, fixed test points, repeated
/// sampling plus prediction. theta is derived from range_m as 3 / range_m;
/// nugget is the c0 share of sill_total.
struct ScenarioConfig {
  double extent_m = 8000.0;
  double resolution_m = 50.0;
  double range_m = 600.0;
  double nugget = 0.0;
  double sill_total = 1.0;
  std::size_t n_points = 650;
  std::size_t n_test_points = 200;
  std::size_t n_replications = 200;
  VariogramMode variogram_mode = VariogramMode::estimated;
  double max_vgm_dist_m = 1000.0;
  int vgm_bins = 15;
  bool fit_nugget = true;
  bool censor_invalid_fits = false;
  MultivariateMode multivariate = MultivariateMode::off;
  double r = 0.0;
  std::array<std::size_t, 3> n_points_per_variable = {0, 0, 0};  // 0 -> n_points
  NeighborhoodSpec neighborhood{50, 1000.0, 1};
  std::uint64_t seed = 1;
  int threads = 0;  // 0 -> GEOKRIGE_THREADS or hardware

  ExponentialVariogramModel true_model() const {
    return {nugget, sill_total - nugget, 3.0 / range_m};
  }
};

/// Throws ConfigError on invalid or infeasible settings (checked before any
/// simulation work).
void validate_scenario_config(const ScenarioConfig& cfg);

ScenarioConfig scenario_config_from(ConfigReader& reader);
std::vector<std::pair<std::string, std::string>> scenario_metadata(
    const ScenarioConfig& cfg);

/// Per-replication fitted parameters (estimated mode only).
struct ReplicationFitRecord {
  std::size_t replication = 0;
  int variable_id = 0;
  ExponentialVariogramModel model;
  bool converged = false;
  bool valid = false;
  bool refit_used = false;
  double objective = 0.0;
};

struct MethodResult {
  std::string method;  // "univariate" or "cokriging"
  std::vector<PointSummary> points;
  ScenarioSummary summary;
  /// Row-major replication x point prediction matrix; NaN marks a failure.
  std::vector<double> predictions;
  std::size_t n_replications_used = 0;
  std::size_t n_failed_predictions = 0;
  std::size_t n_degenerate_points = 0;  // points with fewer than 2 usable reps
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<int> test_nodes;
  std::vector<Location> test_locations;
  std::vector<double> true_values;  // outcome scale: field value or index
  QuintileBreaks breaks;
  double sd_true = 0.0;
  std::vector<MethodResult> methods;
  std::vector<ReplicationFitRecord> fit_records;
  std::vector<std::uint8_t> replication_fit_valid;  // per replication
  std::size_t n_invalid_fits = 0;
  std::size_t n_refits = 0;
  std::size_t n_failed_replications = 0;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Writes scenario_summary.csv, point_summary.csv and (estimated mode)
/// variogram_params.csv under out_dir; creates the directory if needed.
/// Thread count is intentionally absent from the embedded metadata so runs
/// differing only in threads emit byte-identical files.
void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir);

}  // namespace geokrige
