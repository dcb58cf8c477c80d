#pragma once

// Prediction pipeline for an external geo-coded dataset with three variables
// observed at every point: hold out test rows, sample nested subsets of known
// points, fit variogram models per subset, krige each variable alone and
// jointly, and score the resulting index predictions against the held-out
// truth.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "geokrige/config.hpp"
#include "geokrige/evaluation.hpp"
#include "geokrige/kriging.hpp"
#include "geokrige/variogram.hpp"

namespace geokrige {

enum class VariogramSource { all_points, sampled_points };
enum class PredictionArm { univariate, multivariate, both };

struct CaseStudyConfig {
  std::string input_csv;
  std::string id_column = "point_id";
  std::string x_column = "x_m";
  std::string y_column = "y_m";
  std::array<std::string, 3> var_columns{"var_1", "var_2", "var_3"};

  std::size_t n_test_points = 200;
  // Sample sizes for the known-point subsets; 0 means "all available points".
  std::vector<std::size_t> n_known_menu{500, 1000, 2000, 5000, 0};
  VariogramSource variogram_source = VariogramSource::all_points;
  // Maximum distances at which variogram parameters are tabulated.
  std::vector<double> max_vgm_dist_menu{250.0, 500.0, 756.0, 1000.0, 1250.0};
  // Maximum distance of the empirical variogram behind the kriging models.
  double kriging_vgm_dist_m = 1250.0;
  int vgm_bins = 15;
  bool fit_nugget = true;
  PredictionArm arm = PredictionArm::both;
  IndexMode index_mode = IndexMode::mean;
  NeighborhoodSpec neighborhood{50, std::numeric_limits<double>::infinity(), 1};
  std::uint64_t seed = 1;
  int threads = 0;
};

void validate_case_study_config(const CaseStudyConfig& cfg);
CaseStudyConfig case_study_config_from(ConfigReader& reader);

// One row of the fitted-parameter table: models estimated from the sampled
// subset at one maximum variogram distance, plus the local point density the
// subset induces around the test locations.
struct CaseStudyParamRow {
  std::size_t n_known = 0;  // resolved count (menu entry 0 becomes pool size)
  bool used_all = false;
  double max_dist_m = 0.0;
  double points_within_mean = 0.0;
  double points_within_sd = 0.0;
  std::array<ExponentialVariogramModel, 3> models{};
  std::array<bool, 3> converged{};
};

struct CaseStudyResultRow {
  std::size_t n_known = 0;
  bool used_all = false;
  std::string method;  // "univariate" or "multivariate"
  double prop_correct = 0.0;
  double prop_correct_or_neighbor = 0.0;
  double residual_mean = 0.0;
  double residual_sd = 0.0;
  double residual_median = 0.0;
  double bias_sd_units = 0.0;
  std::size_t n_predicted = 0;
  std::size_t n_failed_predictions = 0;
};

struct CaseStudyResult {
  CaseStudyConfig config;
  std::size_t n_rows_total = 0;
  std::size_t n_pool = 0;
  double sd_true = 0.0;
  QuintileBreaks breaks{};
  std::vector<CaseStudyParamRow> param_rows;
  std::vector<CaseStudyResultRow> result_rows;
};

CaseStudyResult run_case_study(const CaseStudyConfig& cfg);

// Writes case_study_results.csv and variogram_params.csv into out_dir.
void write_case_study_outputs(const CaseStudyResult& result,
                              const std::string& out_dir);

std::vector<std::pair<std::string, std::string>> case_study_metadata(
    const CaseStudyConfig& cfg);

}  // namespace geokrige
