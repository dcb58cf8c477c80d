#include "geokrige/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>

#include "geokrige/csv.hpp"
#include "geokrige/errors.hpp"
#include "geokrige/lmc.hpp"
#include "geokrige/rng.hpp"
#include "geokrige/threading.hpp"

namespace geokrige {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t points_for_variable(const ScenarioConfig& cfg, int v) {
  const std::size_t n = cfg.n_points_per_variable[static_cast<std::size_t>(v)];
  return n > 0 ? n : cfg.n_points;
}

struct RepOutput {
  std::vector<double> uni;
  std::vector<double> cok;
  std::vector<ReplicationFitRecord> fits;
  bool fit_valid = true;
  bool refit_used = false;
  bool failed = false;
  std::string failure;
};

ReplicationFitRecord record_from(std::size_t rep, int variable,
                                 const ScreenedFit& sf) {
  ReplicationFitRecord r;
  r.replication = rep;
  r.variable_id = variable;
  r.model = sf.fit.model;
  r.converged = sf.fit.diag.converged;
  r.valid = sf.valid;
  r.refit_used = sf.refit_used;
  r.objective = sf.fit.diag.objective;
  return r;
}

std::vector<int> node_ids_of(const SpatialDataset& ds) {
  std::vector<int> ids;
  ids.reserve(ds.size());
  for (const auto& p : ds.points()) ids.push_back(p.point_id);
  return ids;
}

RepOutput run_univariate_rep(const ScenarioConfig& cfg, const FieldRealization& field,
                             const std::vector<int>& test_nodes,
                             const std::vector<Location>& targets, std::size_t rep) {
  RepOutput out;
  out.uni.assign(targets.size(), kNaN);

  const std::uint64_t rep_seed = mix_seed(cfg.seed, rng_salt::replication, rep);
  const SpatialDataset obs =
      sample_observations(field, cfg.n_points, rep_seed, test_nodes);

  ExponentialVariogramModel model = cfg.true_model();
  if (cfg.variogram_mode == VariogramMode::estimated) {
    const EmpiricalVariogram emp =
        empirical_variogram(obs, cfg.max_vgm_dist_m, cfg.vgm_bins);
    const ScreenedFit sf =
        fit_exponential_screened(emp, obs.value_variance(), cfg.fit_nugget);
    model = sf.fit.model;
    out.fit_valid = sf.valid;
    out.refit_used = sf.refit_used;
    out.fits.push_back(record_from(rep, 0, sf));
  }

  const SpatialIndex index(obs);
  const auto outcomes = krige_batch(index, model, targets, cfg.neighborhood);
  for (std::size_t p = 0; p < outcomes.size(); ++p)
    if (outcomes[p].ok) out.uni[p] = outcomes[p].pred.predicted_value;
  return out;
}

RepOutput run_multivariate_rep(const ScenarioConfig& cfg,
                               const MultiFieldRealization& multi,
                               const std::vector<int>& test_nodes,
                               const std::vector<Location>& targets, std::size_t rep) {
  RepOutput out;
  out.uni.assign(targets.size(), kNaN);
  out.cok.assign(targets.size(), kNaN);

  const std::uint64_t rep_seed = mix_seed(cfg.seed, rng_salt::replication, rep);

  std::array<SpatialDataset, 3> obs;
  if (cfg.multivariate == MultivariateMode::collocated) {
    obs[0] = sample_observations(multi.fields[0], cfg.n_points, rep_seed, test_nodes, 0);
    const std::vector<int> nodes = node_ids_of(obs[0]);
    obs[1] = dataset_from_nodes(multi.fields[1], nodes, 1);
    obs[2] = dataset_from_nodes(multi.fields[2], nodes, 2);
  } else {
    for (int v = 0; v < 3; ++v)
      obs[static_cast<std::size_t>(v)] = sample_observations(
          multi.fields[static_cast<std::size_t>(v)], points_for_variable(cfg, v),
          mix_seed(rep_seed, rng_salt::variable, static_cast<std::uint64_t>(v)),
          test_nodes, v);
  }

  std::array<ExponentialVariogramModel, 3> uni_models;
  uni_models.fill(cfg.true_model());
  CoregionalizationModel lmc = intrinsic_lmc(cfg.true_model(), cfg.r);

  if (cfg.variogram_mode == VariogramMode::estimated) {
    std::array<EmpiricalVariogram, 3> direct;
    double theta_sum = 0.0;
    for (int v = 0; v < 3; ++v) {
      direct[static_cast<std::size_t>(v)] = empirical_variogram(
          obs[static_cast<std::size_t>(v)], cfg.max_vgm_dist_m, cfg.vgm_bins);
      const ScreenedFit sf = fit_exponential_screened(
          direct[static_cast<std::size_t>(v)],
          obs[static_cast<std::size_t>(v)].value_variance(), cfg.fit_nugget);
      uni_models[static_cast<std::size_t>(v)] = sf.fit.model;
      out.fit_valid = out.fit_valid && sf.valid;
      out.refit_used = out.refit_used || sf.refit_used;
      out.fits.push_back(record_from(rep, v, sf));
      theta_sum += sf.fit.model.theta;
    }
    std::array<EmpiricalVariogram, 3> cross;
    const CrossMode mode = cfg.multivariate == MultivariateMode::collocated
                               ? CrossMode::collocated
                               : CrossMode::covariance;
    cross[0] = empirical_cross_variogram(obs[0], obs[1], cfg.max_vgm_dist_m,
                                         cfg.vgm_bins, mode);
    cross[1] = empirical_cross_variogram(obs[0], obs[2], cfg.max_vgm_dist_m,
                                         cfg.vgm_bins, mode);
    cross[2] = empirical_cross_variogram(obs[1], obs[2], cfg.max_vgm_dist_m,
                                         cfg.vgm_bins, mode);
    lmc = fit_lmc(direct, cross, theta_sum / 3.0).model;
  }

  std::array<std::optional<SpatialIndex>, 3> idx;
  std::array<const SpatialIndex*, 3> idx_ptr{};
  for (int v = 0; v < 3; ++v) {
    idx[static_cast<std::size_t>(v)].emplace(obs[static_cast<std::size_t>(v)]);
    idx_ptr[static_cast<std::size_t>(v)] = &*idx[static_cast<std::size_t>(v)];
  }

  // Univariate arm: each variable kriged from its own sample alone.
  std::array<std::vector<KrigingOutcome>, 3> uni_out;
  for (int v = 0; v < 3; ++v)
    uni_out[static_cast<std::size_t>(v)] =
        krige_batch(*idx_ptr[static_cast<std::size_t>(v)],
                    uni_models[static_cast<std::size_t>(v)], targets,
                    cfg.neighborhood);
  for (std::size_t p = 0; p < targets.size(); ++p) {
    if (uni_out[0][p].ok && uni_out[1][p].ok && uni_out[2][p].ok)
      out.uni[p] = uni_out[0][p].pred.predicted_value +
                   uni_out[1][p].pred.predicted_value +
                   uni_out[2][p].pred.predicted_value;
  }

  const auto cok_out = cokrige_batch(idx_ptr, lmc, targets, cfg.neighborhood);
  for (std::size_t p = 0; p < targets.size(); ++p) {
    const auto& three = cok_out[p];
    if (three[0].ok && three[1].ok && three[2].ok)
      out.cok[p] = three[0].pred.predicted_value + three[1].pred.predicted_value +
                   three[2].pred.predicted_value;
  }
  return out;
}

MethodResult collect_method(const std::string& name, const ScenarioConfig& cfg,
                            const std::vector<RepOutput>& reps,
                            bool use_cok, const std::vector<int>& test_nodes,
                            const std::vector<Location>& locations,
                            const std::vector<double>& truth,
                            const QuintileBreaks& breaks, double sd_true) {
  const std::size_t n_pts = truth.size();
  MethodResult m;
  m.method = name;
  m.predictions.assign(reps.size() * n_pts, kNaN);

  for (std::size_t rep = 0; rep < reps.size(); ++rep) {
    if (reps[rep].failed) continue;
    if (cfg.censor_invalid_fits && !reps[rep].fit_valid) continue;
    const auto& vals = use_cok ? reps[rep].cok : reps[rep].uni;
    for (std::size_t p = 0; p < n_pts; ++p) m.predictions[rep * n_pts + p] = vals[p];
  }

  std::size_t usable_reps = 0;
  for (std::size_t rep = 0; rep < reps.size(); ++rep)
    if (!reps[rep].failed && !(cfg.censor_invalid_fits && !reps[rep].fit_valid))
      ++usable_reps;
  m.n_replications_used = usable_reps;

  std::vector<PointSummary> good;
  for (std::size_t p = 0; p < n_pts; ++p) {
    std::vector<double> preds;
    preds.reserve(reps.size());
    for (std::size_t rep = 0; rep < reps.size(); ++rep) {
      const double v = m.predictions[rep * n_pts + p];
      if (std::isfinite(v)) preds.push_back(v);
    }
    m.n_failed_predictions += usable_reps - preds.size();

    PointSummary s;
    if (preds.size() >= 2) {
      s = point_metrics(preds, truth[p], sd_true, breaks);
    } else {
      ++m.n_degenerate_points;
      s.true_value = truth[p];
      s.true_quintile = quintile_category(breaks, truth[p]);
      s.mean_prediction = s.bias = s.empirical_se = s.mse = kNaN;
      s.prop_correct = s.prop_correct_or_neighbor = kNaN;
      s.n_replications = preds.size();
    }
    s.point_id = test_nodes[p];
    s.loc = locations[p];
    m.points.push_back(s);
    if (preds.size() >= 2) good.push_back(s);
  }

  if (good.empty())
    throw DataError("scenario produced no evaluable test point for " + name);
  m.summary = summarize_points(good);
  return m;
}

}  // namespace

void validate_scenario_config(const ScenarioConfig& cfg) {
  const auto fail = [](const std::string& why) { throw ConfigError(why); };

  if (!(cfg.extent_m > 0.0) || !(cfg.resolution_m > 0.0)) fail("extent and resolution must be positive");
  if (cfg.extent_m < cfg.resolution_m) fail("extent smaller than resolution");
  if (!(cfg.range_m > 0.0)) fail("range_m must be positive");
  if (cfg.nugget < 0.0) fail("nugget must be nonnegative");
  if (!(cfg.sill_total > cfg.nugget)) fail("sill_total must exceed the nugget");
  if (cfg.n_points < 2) fail("n_points must be at least 2");
  if (cfg.n_test_points < 5) fail("n_test_points must be at least 5");
  if (cfg.n_replications < 2) fail("n_replications must be at least 2");
  if (!(cfg.max_vgm_dist_m > 0.0)) fail("max_vgm_dist_m must be positive");
  if (cfg.vgm_bins < 1) fail("vgm_bins must be at least 1");
  if (!(cfg.r >= 0.0) || cfg.r >= 1.0) fail("r must lie in [0, 1)");
  if (cfg.neighborhood.max_points < 1) fail("neighborhood max_points must be at least 1");
  if (cfg.neighborhood.min_points < 1) fail("neighborhood min_points must be at least 1");
  if (cfg.neighborhood.min_points > cfg.neighborhood.max_points)
    fail("neighborhood min_points exceeds max_points");
  if (!(cfg.neighborhood.max_radius_m > 0.0)) fail("neighborhood max_radius_m must be positive");

  const std::size_t side =
      static_cast<std::size_t>(std::floor(cfg.extent_m / cfg.resolution_m)) + 1;
  const std::size_t nodes = side * side;
  if (cfg.n_test_points > nodes) fail("more test points than grid nodes");

  if (cfg.multivariate == MultivariateMode::off) {
    if (cfg.r != 0.0) fail("r is set but multivariate mode is off");
    for (std::size_t n : cfg.n_points_per_variable)
      if (n != 0) fail("per-variable point counts need a multivariate mode");
    if (cfg.n_points + cfg.n_test_points > nodes)
      fail("n_points + n_test_points exceeds the " + std::to_string(nodes) +
           " grid nodes");
  } else {
    for (int v = 0; v < 3; ++v) {
      const std::size_t n = cfg.n_points_per_variable[static_cast<std::size_t>(v)] > 0
                                ? cfg.n_points_per_variable[static_cast<std::size_t>(v)]
                                : cfg.n_points;
      if (n < 2) fail("per-variable n_points must be at least 2");
      if (n + cfg.n_test_points > nodes)
        fail("variable " + std::to_string(v) + " sample plus test points exceeds the " +
             std::to_string(nodes) + " grid nodes");
    }
  }
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  validate_scenario_config(cfg);

  ScenarioResult result;
  result.config = cfg;

  const bool multivariate = cfg.multivariate != MultivariateMode::off;
  FieldRealization field;
  MultiFieldRealization multi;
  const FieldRealization* grid = nullptr;
  if (multivariate) {
    multi = simulate_multivariate_grf(cfg.extent_m, cfg.resolution_m,
                                      cfg.true_model(), cfg.r, cfg.seed);
    grid = &multi.fields[0];
  } else {
    field = simulate_grf(cfg.extent_m, cfg.resolution_m, cfg.true_model(), cfg.seed);
    grid = &field;
  }

  result.test_nodes = select_test_nodes(*grid, cfg.n_test_points, cfg.seed);
  for (int node : result.test_nodes)
    result.test_locations.push_back(grid->node_location(node));

  result.true_values.reserve(result.test_nodes.size());
  for (int node : result.test_nodes) {
    const std::size_t q = static_cast<std::size_t>(node);
    if (multivariate)
      result.true_values.push_back(multi.fields[0].values[q] +
                                   multi.fields[1].values[q] +
                                   multi.fields[2].values[q]);
    else
      result.true_values.push_back(field.values[q]);
  }
  result.breaks = quintile_breaks(result.true_values);
  result.sd_true = multivariate
                       ? std::sqrt(cfg.sill_total * (3.0 + 6.0 * cfg.r))
                       : std::sqrt(cfg.sill_total);

  std::vector<RepOutput> reps(cfg.n_replications);
  const int threads = resolve_threads(cfg.threads);
  parallel_for(cfg.n_replications, threads, [&](std::size_t rep) {
    try {
      reps[rep] = multivariate
                      ? run_multivariate_rep(cfg, multi, result.test_nodes,
                                             result.test_locations, rep)
                      : run_univariate_rep(cfg, field, result.test_nodes,
                                           result.test_locations, rep);
    } catch (const std::exception& e) {
      reps[rep].failed = true;
      reps[rep].failure = e.what();
      reps[rep].uni.assign(result.test_locations.size(), kNaN);
      reps[rep].cok.assign(result.test_locations.size(), kNaN);
    }
  });

  for (const auto& rep : reps) {
    if (rep.failed) ++result.n_failed_replications;
    result.replication_fit_valid.push_back(rep.fit_valid ? 1 : 0);
    if (!rep.fit_valid) ++result.n_invalid_fits;
    if (rep.refit_used) ++result.n_refits;
    for (const auto& f : rep.fits) result.fit_records.push_back(f);
  }

  result.methods.push_back(collect_method(
      "univariate", cfg, reps, false, result.test_nodes, result.test_locations,
      result.true_values, result.breaks, result.sd_true));
  if (multivariate)
    result.methods.push_back(collect_method(
        "cokriging", cfg, reps, true, result.test_nodes, result.test_locations,
        result.true_values, result.breaks, result.sd_true));
  return result;
}

ScenarioConfig scenario_config_from(ConfigReader& reader) {
  ScenarioConfig cfg;
  cfg.extent_m = reader.get_double("extent_m", cfg.extent_m);
  cfg.resolution_m = reader.get_double("resolution_m", cfg.resolution_m);
  cfg.range_m = reader.get_double("range_m", cfg.range_m);
  cfg.nugget = reader.get_double("nugget", cfg.nugget);
  cfg.sill_total = reader.get_double("sill_total", cfg.sill_total);
  cfg.n_points = static_cast<std::size_t>(reader.get_int("n_points", static_cast<long long>(cfg.n_points)));
  cfg.n_test_points = static_cast<std::size_t>(
      reader.get_int("n_test_points", static_cast<long long>(cfg.n_test_points)));
  cfg.n_replications = static_cast<std::size_t>(
      reader.get_int("n_replications", static_cast<long long>(cfg.n_replications)));

  const std::string mode = reader.get_string("variogram_mode", "estimated");
  if (mode == "estimated") cfg.variogram_mode = VariogramMode::estimated;
  else if (mode == "fixed") cfg.variogram_mode = VariogramMode::fixed;
  else throw ConfigError("variogram_mode must be 'estimated' or 'fixed', got " + mode);

  cfg.max_vgm_dist_m = reader.get_double("max_vgm_dist_m", cfg.max_vgm_dist_m);
  cfg.vgm_bins = static_cast<int>(reader.get_int("vgm_bins", cfg.vgm_bins));
  cfg.fit_nugget = reader.get_bool("fit_nugget", cfg.fit_nugget);
  cfg.censor_invalid_fits = reader.get_bool("censor_invalid_fits", cfg.censor_invalid_fits);

  const std::string mv = reader.get_string("multivariate", "off");
  if (mv == "off") cfg.multivariate = MultivariateMode::off;
  else if (mv == "collocated") cfg.multivariate = MultivariateMode::collocated;
  else if (mv == "heterotopic") cfg.multivariate = MultivariateMode::heterotopic;
  else throw ConfigError("multivariate must be off, collocated or heterotopic, got " + mv);

  cfg.r = reader.get_double("r", cfg.r);
  cfg.n_points_per_variable[0] = static_cast<std::size_t>(reader.get_int("n_points_var_1", 0));
  cfg.n_points_per_variable[1] = static_cast<std::size_t>(reader.get_int("n_points_var_2", 0));
  cfg.n_points_per_variable[2] = static_cast<std::size_t>(reader.get_int("n_points_var_3", 0));

  cfg.neighborhood.max_points = static_cast<std::size_t>(
      reader.get_int("max_neighbors", static_cast<long long>(cfg.neighborhood.max_points)));
  cfg.neighborhood.max_radius_m = reader.get_double("max_radius_m", cfg.neighborhood.max_radius_m);
  cfg.neighborhood.min_points = static_cast<std::size_t>(
      reader.get_int("min_neighbors", static_cast<long long>(cfg.neighborhood.min_points)));

  cfg.seed = static_cast<std::uint64_t>(reader.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.threads = static_cast<int>(reader.get_int("threads", cfg.threads));
  return cfg;
}

std::vector<std::pair<std::string, std::string>> scenario_metadata(
    const ScenarioConfig& cfg) {
  const ExponentialVariogramModel m = cfg.true_model();
  const char* mv = cfg.multivariate == MultivariateMode::off
                       ? "off"
                       : cfg.multivariate == MultivariateMode::collocated
                             ? "collocated"
                             : "heterotopic";
  std::vector<std::pair<std::string, std::string>> md = {
      {"kind", "scenario"},
      {"extent_m", format_number(cfg.extent_m)},
      {"resolution_m", format_number(cfg.resolution_m)},
      {"range_m", format_number(cfg.range_m)},
      {"theta", format_number(m.theta)},
      {"nugget", format_number(cfg.nugget)},
      {"sill_total", format_number(cfg.sill_total)},
      {"psill", format_number(m.psill)},
      {"n_points", std::to_string(cfg.n_points)},
      {"n_test_points", std::to_string(cfg.n_test_points)},
      {"n_replications", std::to_string(cfg.n_replications)},
      {"variogram_mode",
       cfg.variogram_mode == VariogramMode::estimated ? "estimated" : "fixed"},
      {"max_vgm_dist_m", format_number(cfg.max_vgm_dist_m)},
      {"vgm_bins", std::to_string(cfg.vgm_bins)},
      {"fit_nugget", cfg.fit_nugget ? "true" : "false"},
      {"censor_invalid_fits", cfg.censor_invalid_fits ? "true" : "false"},
      {"multivariate", mv},
      {"r", format_number(cfg.r)},
      {"n_points_var_1", std::to_string(cfg.n_points_per_variable[0])},
      {"n_points_var_2", std::to_string(cfg.n_points_per_variable[1])},
      {"n_points_var_3", std::to_string(cfg.n_points_per_variable[2])},
      {"max_neighbors", std::to_string(cfg.neighborhood.max_points)},
      {"max_radius_m", format_number(cfg.neighborhood.max_radius_m)},
      {"min_neighbors", std::to_string(cfg.neighborhood.min_points)},
      {"seed", std::to_string(cfg.seed)},
  };
  return md;
}

void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto md = scenario_metadata(result.config);

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : result.methods) {
      rows.push_back({
          m.method,
          format_number(m.summary.prop_correct.mean),
          format_number(m.summary.prop_correct.sd),
          format_number(m.summary.prop_correct.median),
          format_number(m.summary.prop_correct_or_neighbor.mean),
          format_number(m.summary.prop_correct_or_neighbor.sd),
          format_number(m.summary.prop_correct_or_neighbor.median),
          format_number(m.summary.bias.mean),
          format_number(m.summary.bias_abs.mean),
          format_number(m.summary.bias.sd),
          format_number(m.summary.bias.median),
          format_number(m.summary.empirical_se.mean),
          format_number(m.summary.empirical_se.sd),
          format_number(m.summary.empirical_se.median),
          format_number(m.summary.mse.mean),
          format_number(m.summary.mse.sd),
          format_number(m.summary.mse.median),
          std::to_string(m.summary.n_points),
          std::to_string(m.n_replications_used),
          std::to_string(result.n_invalid_fits),
          std::to_string(result.n_refits),
          std::to_string(m.n_failed_predictions),
          std::to_string(m.n_degenerate_points),
      });
    }
    write_csv((fs::path(out_dir) / "scenario_summary.csv").string(), md,
              {"method", "prop_correct_mean", "prop_correct_sd", "prop_correct_median",
               "prop_neighbor_mean", "prop_neighbor_sd", "prop_neighbor_median",
               "bias_mean", "bias_abs_mean", "bias_sd", "bias_median", "se_mean",
               "se_sd", "se_median", "mse_mean", "mse_sd", "mse_median",
               "n_points_summarized", "n_replications_used", "n_invalid_fits",
               "n_refits", "n_failed_predictions", "n_degenerate_points"},
              rows);
  }

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : result.methods) {
      for (const auto& p : m.points) {
        rows.push_back({
            m.method,
            std::to_string(p.point_id),
            format_number(p.loc.x),
            format_number(p.loc.y),
            format_number(p.true_value),
            std::to_string(p.true_quintile),
            format_number(p.mean_prediction),
            format_number(p.bias),
            format_number(p.empirical_se),
            format_number(p.mse),
            format_number(p.prop_correct),
            format_number(p.prop_correct_or_neighbor),
            std::to_string(p.n_replications),
        });
      }
    }
    write_csv((fs::path(out_dir) / "point_summary.csv").string(), md,
              {"method", "point_id", "x_m", "y_m", "true_value", "true_quintile",
               "mean_prediction", "bias_sd_units", "empirical_se", "mse",
               "prop_correct", "prop_correct_or_neighbor", "n_replications_used"},
              rows);
  }

  if (!result.fit_records.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : result.fit_records) {
      rows.push_back({
          std::to_string(f.replication),
          std::to_string(f.variable_id),
          f.converged ? "true" : "false",
          f.valid ? "true" : "false",
          f.refit_used ? "true" : "false",
          format_number(f.model.c0),
          format_number(f.model.psill),
          format_number(f.model.theta),
          format_number(range3(f.model)),
          format_number(practical_range(f.model)),
          format_number(f.objective),
      });
    }
    write_csv((fs::path(out_dir) / "variogram_params.csv").string(), md,
              {"replication", "variable_id", "converged", "valid", "refit_used",
               "c0", "psill", "theta", "range3_m", "practical_range_m", "objective"},
              rows);
  }
}

}  // namespace geokrige
