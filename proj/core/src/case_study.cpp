#include "geokrige/case_study.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "geokrige/csv.hpp"
#include "geokrige/errors.hpp"
#include "geokrige/lmc.hpp"
#include "geokrige/rng.hpp"
#include "geokrige/spatial_index.hpp"
#include "geokrige/threading.hpp"
#include "geokrige/variogram_fit.hpp"

namespace geokrige {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trimmed(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_count_menu(const std::string& text) {
  std::vector<std::size_t> menu;
  for (const std::string& item : split_list(text)) {
    if (item == "all") {
      menu.push_back(0);
      continue;
    }
    try {
      const long long n = std::stoll(item);
      if (n <= 0) throw ConfigError("count menu entries must be positive or 'all'");
      menu.push_back(static_cast<std::size_t>(n));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("cannot parse count menu entry '" + item + "'");
    }
  }
  return menu;
}

std::vector<double> parse_dist_menu(const std::string& text) {
  std::vector<double> menu;
  for (const std::string& item : split_list(text)) {
    try {
      menu.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse distance menu entry '" + item + "'");
    }
  }
  return menu;
}

std::string count_menu_string(const std::vector<std::size_t>& menu) {
  std::string s;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    if (i) s += ",";
    s += menu[i] == 0 ? std::string("all") : std::to_string(menu[i]);
  }
  return s;
}

std::string dist_menu_string(const std::vector<double>& menu) {
  std::string s;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    if (i) s += ",";
    s += format_number(menu[i]);
  }
  return s;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return out;
}

struct KnownSubset {
  std::size_t n = 0;
  bool used_all = false;
  std::array<SpatialDataset, 3> ds;
};

struct KrigingModels {
  std::array<ExponentialVariogramModel, 3> uni{};
  CoregionalizationModel lmc{};
};

// Per-variable exponential fits plus a shared-scale coregionalization, all
// from one collocated source at the configured kriging variogram distance.
KrigingModels fit_models(const std::array<SpatialDataset, 3>& source,
                         const CaseStudyConfig& cfg, bool need_lmc) {
  KrigingModels out;
  std::array<EmpiricalVariogram, 3> direct;
  double theta_sum = 0.0;
  for (int v = 0; v < 3; ++v) {
    const auto& ds = source[static_cast<std::size_t>(v)];
    direct[static_cast<std::size_t>(v)] =
        empirical_variogram(ds, cfg.kriging_vgm_dist_m, cfg.vgm_bins);
    const ScreenedFit sf = fit_exponential_screened(
        direct[static_cast<std::size_t>(v)], ds.value_variance(), cfg.fit_nugget);
    out.uni[static_cast<std::size_t>(v)] = sf.fit.model;
    theta_sum += sf.fit.model.theta;
  }
  if (need_lmc) {
    std::array<EmpiricalVariogram, 3> cross;
    cross[0] = empirical_cross_variogram(source[0], source[1], cfg.kriging_vgm_dist_m,
                                         cfg.vgm_bins, CrossMode::collocated);
    cross[1] = empirical_cross_variogram(source[0], source[2], cfg.kriging_vgm_dist_m,
                                         cfg.vgm_bins, CrossMode::collocated);
    cross[2] = empirical_cross_variogram(source[1], source[2], cfg.kriging_vgm_dist_m,
                                         cfg.vgm_bins, CrossMode::collocated);
    out.lmc = fit_lmc(direct, cross, theta_sum / 3.0).model;
  }
  return out;
}

CaseStudyResultRow score_predictions(const KnownSubset& subset,
                                     const std::string& method,
                                     const std::vector<double>& preds,
                                     const std::vector<double>& truth,
                                     const QuintileBreaks& breaks, double sd_true) {
  CaseStudyResultRow row;
  row.n_known = subset.n;
  row.used_all = subset.used_all;
  row.method = method;

  std::vector<double> ok_pred, ok_truth, residuals;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    if (!std::isfinite(preds[t])) continue;
    ok_pred.push_back(preds[t]);
    ok_truth.push_back(truth[t]);
    residuals.push_back(preds[t] - truth[t]);
  }
  row.n_predicted = ok_pred.size();
  row.n_failed_predictions = preds.size() - ok_pred.size();
  if (ok_pred.empty()) {
    row.prop_correct = row.prop_correct_or_neighbor = kNaN;
    row.residual_mean = row.residual_sd = row.residual_median = kNaN;
    row.bias_sd_units = kNaN;
    return row;
  }

  const ReliabilityResult rel = reliability(ok_pred, ok_truth, breaks);
  row.prop_correct = rel.prop_correct;
  row.prop_correct_or_neighbor = rel.prop_correct_or_neighbor;
  const MeanSd res = mean_sd(residuals);
  row.residual_mean = res.mean;
  row.residual_sd = res.sd;
  row.residual_median = percentile(residuals, 0.5);
  row.bias_sd_units = res.mean / sd_true;
  return row;
}

}  // namespace

void validate_case_study_config(const CaseStudyConfig& cfg) {
  const auto fail = [](const std::string& why) { throw ConfigError(why); };

  if (cfg.input_csv.empty()) fail("input_csv is required");
  if (cfg.n_test_points < 5) fail("n_test_points must be at least 5");
  if (cfg.n_known_menu.empty()) fail("n_known_menu is empty");
  for (std::size_t n : cfg.n_known_menu)
    if (n != 0 && n < 2) fail("n_known entries must be at least 2 (or 'all')");
  if (cfg.max_vgm_dist_menu.empty()) fail("max_vgm_dist_menu is empty");
  for (double d : cfg.max_vgm_dist_menu)
    if (!(d > 0.0)) fail("variogram distances must be positive");
  if (!(cfg.kriging_vgm_dist_m > 0.0)) fail("kriging_vgm_dist_m must be positive");
  if (cfg.vgm_bins < 1) fail("vgm_bins must be at least 1");
  if (cfg.neighborhood.max_points < 1) fail("neighborhood max_points must be at least 1");
  if (cfg.neighborhood.min_points < 1) fail("neighborhood min_points must be at least 1");
  if (cfg.neighborhood.min_points > cfg.neighborhood.max_points)
    fail("neighborhood min_points exceeds max_points");
  if (!(cfg.neighborhood.max_radius_m > 0.0))
    fail("neighborhood max_radius_m must be positive");
}

CaseStudyConfig case_study_config_from(ConfigReader& reader) {
  CaseStudyConfig cfg;
  cfg.input_csv = reader.get_string("input_csv", "");
  cfg.id_column = reader.get_string("id_column", cfg.id_column);
  cfg.x_column = reader.get_string("x_column", cfg.x_column);
  cfg.y_column = reader.get_string("y_column", cfg.y_column);
  cfg.var_columns[0] = reader.get_string("var_column_1", cfg.var_columns[0]);
  cfg.var_columns[1] = reader.get_string("var_column_2", cfg.var_columns[1]);
  cfg.var_columns[2] = reader.get_string("var_column_3", cfg.var_columns[2]);

  cfg.n_test_points = static_cast<std::size_t>(
      reader.get_int("n_test_points", static_cast<long long>(cfg.n_test_points)));
  if (reader.has("n_known_menu"))
    cfg.n_known_menu = parse_count_menu(reader.get_string("n_known_menu", ""));

  const std::string source = reader.get_string("variogram_source", "all_points");
  if (source == "all_points") cfg.variogram_source = VariogramSource::all_points;
  else if (source == "sampled_points") cfg.variogram_source = VariogramSource::sampled_points;
  else throw ConfigError("variogram_source must be all_points or sampled_points, got " + source);

  if (reader.has("max_vgm_dist_menu"))
    cfg.max_vgm_dist_menu = parse_dist_menu(reader.get_string("max_vgm_dist_menu", ""));
  cfg.kriging_vgm_dist_m = reader.get_double("kriging_vgm_dist_m", cfg.kriging_vgm_dist_m);
  cfg.vgm_bins = static_cast<int>(reader.get_int("vgm_bins", cfg.vgm_bins));
  cfg.fit_nugget = reader.get_bool("fit_nugget", cfg.fit_nugget);

  const std::string arm = reader.get_string("predict", "both");
  if (arm == "both") cfg.arm = PredictionArm::both;
  else if (arm == "univariate") cfg.arm = PredictionArm::univariate;
  else if (arm == "multivariate") cfg.arm = PredictionArm::multivariate;
  else throw ConfigError("predict must be both, univariate or multivariate, got " + arm);

  const std::string index = reader.get_string("index_mode", "mean");
  if (index == "mean") cfg.index_mode = IndexMode::mean;
  else if (index == "sum") cfg.index_mode = IndexMode::sum;
  else throw ConfigError("index_mode must be mean or sum, got " + index);

  cfg.neighborhood.max_points = static_cast<std::size_t>(reader.get_int(
      "max_neighbors", static_cast<long long>(cfg.neighborhood.max_points)));
  const double radius = reader.get_double("max_radius_m", 0.0);
  cfg.neighborhood.max_radius_m =
      radius > 0.0 ? radius : std::numeric_limits<double>::infinity();
  cfg.neighborhood.min_points = static_cast<std::size_t>(reader.get_int(
      "min_neighbors", static_cast<long long>(cfg.neighborhood.min_points)));

  cfg.seed = static_cast<std::uint64_t>(reader.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.threads = static_cast<int>(reader.get_int("threads", cfg.threads));
  return cfg;
}

CaseStudyResult run_case_study(const CaseStudyConfig& cfg) {
  validate_case_study_config(cfg);

  const SpatialDataset all = read_multi_point_csv(
      cfg.input_csv, cfg.id_column, cfg.x_column, cfg.y_column, cfg.var_columns);
  const std::array<SpatialDataset, 3> by_var{
      all.filter_variable(0), all.filter_variable(1), all.filter_variable(2)};
  const std::size_t n_rows = by_var[0].size();
  if (by_var[1].size() != n_rows || by_var[2].size() != n_rows)
    throw DataError("variables are not recorded at every point");
  if (n_rows < cfg.n_test_points + 100)
    throw DataError("need at least " + std::to_string(cfg.n_test_points + 100) +
                    " rows, file has " + std::to_string(n_rows));

  CaseStudyResult result;
  result.config = cfg;
  result.n_rows_total = n_rows;

  // One shuffle drives both the test holdout and the nested known subsets:
  // the prefix of the pool at each menu size, so larger samples contain
  // smaller ones.
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto engine = make_engine(cfg.seed, rng_salt::case_study);
  for (std::size_t i = n_rows - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(engine)]);
  }
  const std::vector<std::size_t> test_rows(perm.begin(),
                                           perm.begin() + cfg.n_test_points);
  const std::vector<std::size_t> pool(perm.begin() + cfg.n_test_points, perm.end());
  result.n_pool = pool.size();

  const std::size_t n_test = test_rows.size();
  std::vector<Location> test_locs(n_test);
  std::vector<double> truth(n_test);
  for (std::size_t t = 0; t < n_test; ++t) {
    const std::size_t row = test_rows[t];
    test_locs[t] = by_var[0][row].loc;
    const std::vector<std::optional<double>> vals{
        by_var[0][row].value, by_var[1][row].value, by_var[2][row].value};
    truth[t] = build_index(vals, cfg.index_mode);
  }
  result.breaks = quintile_breaks(truth);
  result.sd_true = mean_sd(truth).sd;
  if (!(result.sd_true > 0.0)) throw DataError("held-out outcome values are constant");

  std::vector<KnownSubset> subsets;
  for (std::size_t want : cfg.n_known_menu) {
    const std::size_t n = want == 0 ? pool.size() : want;
    if (n > pool.size())
      throw ConfigError("n_known " + std::to_string(n) + " exceeds the " +
                        std::to_string(pool.size()) + " points left after the holdout");
    KnownSubset s;
    s.n = n;
    s.used_all = n == pool.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = pool[i];
      for (int v = 0; v < 3; ++v)
        s.ds[static_cast<std::size_t>(v)].add(by_var[static_cast<std::size_t>(v)][row]);
    }
    subsets.push_back(std::move(s));
  }

  const std::size_t n_subsets = subsets.size();
  std::vector<std::array<std::optional<SpatialIndex>, 3>> subset_idx(n_subsets);
  for (std::size_t k = 0; k < n_subsets; ++k)
    for (int v = 0; v < 3; ++v)
      subset_idx[k][static_cast<std::size_t>(v)].emplace(
          subsets[k].ds[static_cast<std::size_t>(v)]);

  // Fitted-parameter table: per subset and tabulated distance, the point
  // density around the test locations and the three per-variable fits.
  for (std::size_t k = 0; k < n_subsets; ++k) {
    const KnownSubset& s = subsets[k];
    for (double dist : cfg.max_vgm_dist_menu) {
      CaseStudyParamRow row;
      row.n_known = s.n;
      row.used_all = s.used_all;
      row.max_dist_m = dist;

      std::vector<double> counts(n_test);
      for (std::size_t t = 0; t < n_test; ++t) {
        double c = 0.0;
        subset_idx[k][0]->for_each_within(test_locs[t], dist,
                                          [&](std::size_t, double) { c += 1.0; });
        counts[t] = c;
      }
      const MeanSd density = mean_sd(counts);
      row.points_within_mean = density.mean;
      row.points_within_sd = density.sd;

      for (int v = 0; v < 3; ++v) {
        const auto& ds = s.ds[static_cast<std::size_t>(v)];
        try {
          const EmpiricalVariogram emp = empirical_variogram(ds, dist, cfg.vgm_bins);
          const ScreenedFit sf =
              fit_exponential_screened(emp, ds.value_variance(), cfg.fit_nugget);
          row.models[static_cast<std::size_t>(v)] = sf.fit.model;
          row.converged[static_cast<std::size_t>(v)] = sf.fit.diag.converged;
        } catch (const std::exception&) {
          row.models[static_cast<std::size_t>(v)] = {kNaN, kNaN, kNaN};
          row.converged[static_cast<std::size_t>(v)] = false;
        }
      }
      result.param_rows.push_back(row);
    }
  }

  // Kriging models: from the full pool once, or per sampled subset.
  const bool need_lmc = cfg.arm != PredictionArm::univariate;
  const bool do_uni = cfg.arm != PredictionArm::multivariate;
  std::vector<KrigingModels> models(n_subsets);
  if (cfg.variogram_source == VariogramSource::all_points) {
    std::array<SpatialDataset, 3> pool_ds;
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (int v = 0; v < 3; ++v)
        pool_ds[static_cast<std::size_t>(v)].add(
            by_var[static_cast<std::size_t>(v)][pool[i]]);
    const KrigingModels shared = fit_models(pool_ds, cfg, need_lmc);
    for (auto& m : models) m = shared;
  } else {
    for (std::size_t k = 0; k < n_subsets; ++k)
      models[k] = fit_models(subsets[k].ds, cfg, need_lmc);
  }

  std::vector<double> uni_pred(n_subsets * n_test, kNaN);
  std::vector<double> cok_pred(n_subsets * n_test, kNaN);
  parallel_for(n_subsets * n_test, resolve_threads(cfg.threads), [&](std::size_t i) {
    const std::size_t k = i / n_test;
    const std::size_t t = i % n_test;
    const Location& loc = test_locs[t];
    const std::array<const SpatialIndex*, 3> idx{
        &*subset_idx[k][0], &*subset_idx[k][1], &*subset_idx[k][2]};

    if (do_uni) {
      std::vector<std::optional<double>> vals(3);
      bool ok = true;
      for (int v = 0; v < 3 && ok; ++v) {
        try {
          const KrigingPrediction p =
              ordinary_krige(*idx[static_cast<std::size_t>(v)],
                             models[k].uni[static_cast<std::size_t>(v)], loc,
                             cfg.neighborhood);
          vals[static_cast<std::size_t>(v)] = p.predicted_value;
        } catch (const KrigingError&) {
          ok = false;
        }
      }
      if (ok) uni_pred[i] = build_index(vals, cfg.index_mode);
    }
    if (need_lmc) {
      const auto out = cokrige_all(idx, models[k].lmc, loc, cfg.neighborhood);
      if (out[0].ok && out[1].ok && out[2].ok) {
        const std::vector<std::optional<double>> vals{
            out[0].pred.predicted_value, out[1].pred.predicted_value,
            out[2].pred.predicted_value};
        cok_pred[i] = build_index(vals, cfg.index_mode);
      }
    }
  });

  for (std::size_t k = 0; k < n_subsets; ++k) {
    const auto slice = [&](const std::vector<double>& m) {
      return std::vector<double>(m.begin() + static_cast<std::ptrdiff_t>(k * n_test),
                                 m.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_test));
    };
    if (do_uni)
      result.result_rows.push_back(score_predictions(
          subsets[k], "univariate", slice(uni_pred), truth, result.breaks, result.sd_true));
    if (need_lmc)
      result.result_rows.push_back(score_predictions(
          subsets[k], "multivariate", slice(cok_pred), truth, result.breaks, result.sd_true));
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> case_study_metadata(
    const CaseStudyConfig& cfg) {
  const char* source = cfg.variogram_source == VariogramSource::all_points
                           ? "all_points"
                           : "sampled_points";
  const char* arm = cfg.arm == PredictionArm::both
                        ? "both"
                        : cfg.arm == PredictionArm::univariate ? "univariate"
                                                               : "multivariate";
  return {
      {"kind", "case_study"},
      {"input_csv", cfg.input_csv},
      {"id_column", cfg.id_column},
      {"x_column", cfg.x_column},
      {"y_column", cfg.y_column},
      {"var_column_1", cfg.var_columns[0]},
      {"var_column_2", cfg.var_columns[1]},
      {"var_column_3", cfg.var_columns[2]},
      {"n_test_points", std::to_string(cfg.n_test_points)},
      {"n_known_menu", count_menu_string(cfg.n_known_menu)},
      {"variogram_source", source},
      {"max_vgm_dist_menu", dist_menu_string(cfg.max_vgm_dist_menu)},
      {"kriging_vgm_dist_m", format_number(cfg.kriging_vgm_dist_m)},
      {"vgm_bins", std::to_string(cfg.vgm_bins)},
      {"fit_nugget", cfg.fit_nugget ? "true" : "false"},
      {"predict", arm},
      {"index_mode", cfg.index_mode == IndexMode::mean ? "mean" : "sum"},
      {"max_neighbors", std::to_string(cfg.neighborhood.max_points)},
      {"max_radius_m", format_number(cfg.neighborhood.max_radius_m)},
      {"min_neighbors", std::to_string(cfg.neighborhood.min_points)},
      {"seed", std::to_string(cfg.seed)},
  };
}

void write_case_study_outputs(const CaseStudyResult& result,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  auto md = case_study_metadata(result.config);
  md.emplace_back("n_rows_total", std::to_string(result.n_rows_total));
  md.emplace_back("n_pool", std::to_string(result.n_pool));
  md.emplace_back("sd_true", format_number(result.sd_true));

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result.result_rows) {
      rows.push_back({
          std::to_string(r.n_known),
          r.used_all ? "true" : "false",
          r.method,
          format_number(r.prop_correct),
          format_number(r.prop_correct_or_neighbor),
          format_number(r.residual_mean),
          format_number(r.residual_sd),
          format_number(r.residual_median),
          format_number(r.bias_sd_units),
          std::to_string(r.n_predicted),
          std::to_string(r.n_failed_predictions),
      });
    }
    write_csv((fs::path(out_dir) / "case_study_results.csv").string(), md,
              {"n_known", "used_all", "method", "prop_correct",
               "prop_correct_or_neighbor", "residual_mean", "residual_sd",
               "residual_median", "bias_sd_units", "n_predicted",
               "n_failed_predictions"},
              rows);
  }

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result.param_rows) {
      std::vector<std::string> row{
          std::to_string(r.n_known),
          r.used_all ? "true" : "false",
          format_number(r.max_dist_m),
          format_number(r.points_within_mean),
          format_number(r.points_within_sd),
      };
      for (int v = 0; v < 3; ++v) {
        const auto& m = r.models[static_cast<std::size_t>(v)];
        row.push_back(format_number(m.psill));
        row.push_back(format_number(std::isfinite(m.theta) ? 1.0 / m.theta : kNaN));
        row.push_back(format_number(m.c0));
        row.push_back(r.converged[static_cast<std::size_t>(v)] ? "true" : "false");
      }
      rows.push_back(std::move(row));
    }
    write_csv((fs::path(out_dir) / "variogram_params.csv").string(), md,
              {"n_known", "used_all", "max_dist_m", "points_within_mean",
               "points_within_sd", "var1_psill", "var1_scale_m", "var1_nugget",
               "var1_converged", "var2_psill", "var2_scale_m", "var2_nugget",
               "var2_converged", "var3_psill", "var3_scale_m", "var3_nugget",
               "var3_converged"},
              rows);
  }
}

}  // namespace geokrige
