// Command line front end: field simulation, variogram estimation, kriging at
// listed targets, the replication harness, the external-data pipeline, and
// plot data emission. Exit codes: 0 success, 2 configuration error, 3 data
// error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geokrige/case_study.hpp"
#include "geokrige/config.hpp"
#include "geokrige/csv.hpp"
#include "geokrige/errors.hpp"
#include "geokrige/kriging.hpp"
#include "geokrige/plot_data.hpp"
#include "geokrige/random_field.hpp"
#include "geokrige/scenario.hpp"
#include "geokrige/variogram_fit.hpp"

namespace {

using namespace geokrige;

ConfigReader reader_for(const std::string& config_path) {
  if (config_path.empty()) return ConfigReader(KeyValues{});
  return ConfigReader(parse_kv_file(config_path));
}

void reject_unknown_keys(const ConfigReader& reader) {
  const auto unknown = reader.unknown_keys();
  if (unknown.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : unknown) msg += " " + k;
  throw ConfigError(msg);
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<int> threads;
  std::string out;
};

void run_simulate_field(const CommonFlags& flags) {
  ConfigReader reader = reader_for(flags.config_path);
  const double extent = reader.get_double("extent_m", 8000.0);
  const double resolution = reader.get_double("resolution_m", 50.0);
  const double range_m = reader.get_double("range_m", 600.0);
  const double nugget = reader.get_double("nugget", 0.0);
  const double sill_total = reader.get_double("sill_total", 1.0);
  const bool multivariate = reader.get_bool("multivariate", false);
  const double r = reader.get_double("r", 0.0);
  std::uint64_t seed =
      static_cast<std::uint64_t>(reader.get_int("seed", 1));
  reject_unknown_keys(reader);
  if (flags.seed) seed = *flags.seed;

  if (!(range_m > 0.0)) throw ConfigError("range_m must be positive");
  if (!(sill_total > nugget) || nugget < 0.0)
    throw ConfigError("need 0 <= nugget < sill_total");
  const ExponentialVariogramModel model{nugget, sill_total - nugget, 3.0 / range_m};

  const std::string out = flags.out.empty() ? "field.csv" : flags.out;
  if (multivariate) {
    if (!(r >= 0.0) || r >= 1.0) throw ConfigError("r must lie in [0, 1)");
    write_realization_csv(out,
                          simulate_multivariate_grf(extent, resolution, model, r, seed));
  } else {
    write_realization_csv(out, simulate_grf(extent, resolution, model, seed));
  }
  std::cout << "wrote " << out << "\n";
}

struct VariogramFlags {
  std::string points;
  double max_dist = 1000.0;
  int bins = 15;
  bool no_nugget = false;
};

void run_variogram(const CommonFlags& flags, const VariogramFlags& vf) {
  PlotDataRequest req;
  req.kind = "variogram";
  req.inputs = {vf.points};
  req.max_dist_m = vf.max_dist;
  req.bins = vf.bins;
  req.fit_nugget = !vf.no_nugget;
  req.out_path = flags.out.empty() ? "variogram.csv" : flags.out;
  emit_plot_data(req);
  std::cout << "wrote " << req.out_path << "\n";
}

struct KrigeFlags {
  std::string points;
  std::string targets;
  double c0 = 0.0;
  double psill = 1.0;
  double range_m = 600.0;
  bool estimate = false;
  double max_dist = 1000.0;
  int bins = 15;
  std::size_t max_neighbors = 50;
  double max_radius = 1000.0;
  std::size_t min_neighbors = 1;
};

void run_krige(const CommonFlags& flags, const KrigeFlags& kf) {
  const SpatialDataset obs = read_point_csv(kf.points);
  if (obs.size() < 2)
    throw DataError(kf.points + " has fewer than two usable points");

  ExponentialVariogramModel model{kf.c0, kf.psill, 3.0 / kf.range_m};
  if (kf.estimate) {
    const EmpiricalVariogram emp = empirical_variogram(obs, kf.max_dist, kf.bins);
    model = fit_exponential_screened(emp, obs.value_variance(), true).fit.model;
  } else if (!(kf.range_m > 0.0) || !(kf.psill > 0.0) || kf.c0 < 0.0) {
    throw ConfigError("kriging model needs range_m > 0, psill > 0, c0 >= 0");
  }

  const CsvTable table = read_csv(kf.targets);
  const int cx = table.column("x_m");
  const int cy = table.column("y_m");
  if (cx < 0 || cy < 0) throw DataError(kf.targets + " needs columns x_m,y_m");
  std::vector<Location> targets;
  for (const auto& row : table.rows) {
    try {
      targets.push_back({std::stod(row[static_cast<std::size_t>(cx)]),
                         std::stod(row[static_cast<std::size_t>(cy)])});
    } catch (const std::exception&) {
      throw DataError("cannot parse target coordinates in " + kf.targets);
    }
  }
  if (targets.empty()) throw DataError(kf.targets + " lists no targets");

  const NeighborhoodSpec nbhd{kf.max_neighbors,
                              kf.max_radius > 0.0
                                  ? kf.max_radius
                                  : std::numeric_limits<double>::infinity(),
                              kf.min_neighbors};
  const auto outcomes = krige_batch(obs, model, targets, nbhd);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& o = outcomes[i];
    rows.push_back({format_number(targets[i].x), format_number(targets[i].y),
                    o.ok ? format_number(o.pred.predicted_value) : "nan",
                    o.ok ? format_number(o.pred.kriging_variance) : "nan",
                    std::to_string(o.ok ? o.pred.n_neighbors_used : o.n_neighbors),
                    o.ok ? "" : o.error});
  }
  const std::string out = flags.out.empty() ? "predictions.csv" : flags.out;
  write_csv(out,
            {{"kind", "kriging"},
             {"points", kf.points},
             {"c0", format_number(model.c0)},
             {"psill", format_number(model.psill)},
             {"theta", format_number(model.theta)},
             {"estimated", kf.estimate ? "true" : "false"}},
            {"x_m", "y_m", "predicted_value", "kriging_variance", "n_neighbors",
             "error"},
            rows);
  std::cout << "wrote " << out << "\n";
}

void run_scenario_cmd(const CommonFlags& flags) {
  if (flags.config_path.empty())
    throw ConfigError("run-scenario needs --config");
  ConfigReader reader = reader_for(flags.config_path);
  ScenarioConfig cfg = scenario_config_from(reader);
  reject_unknown_keys(reader);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.replications) cfg.n_replications = *flags.replications;
  if (flags.threads) cfg.threads = *flags.threads;

  const ScenarioResult result = run_scenario(cfg);
  const std::string out = flags.out.empty() ? "scenario_out" : flags.out;
  write_scenario_outputs(result, out);
  std::cout << "wrote " << out << "/scenario_summary.csv ("
            << result.methods.size() << " method rows, "
            << result.config.n_replications << " replications)\n";
}

void run_case_study_cmd(const CommonFlags& flags) {
  if (flags.config_path.empty())
    throw ConfigError("run-case-study needs --config");
  ConfigReader reader = reader_for(flags.config_path);
  CaseStudyConfig cfg = case_study_config_from(reader);
  reject_unknown_keys(reader);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.threads) cfg.threads = *flags.threads;

  const CaseStudyResult result = run_case_study(cfg);
  const std::string out = flags.out.empty() ? "case_study_out" : flags.out;
  write_case_study_outputs(result, out);
  std::cout << "wrote " << out << "/case_study_results.csv ("
            << result.result_rows.size() << " rows)\n";
}

struct PlotFlags {
  std::string kind;
  std::vector<std::string> inputs;
  std::string method = "univariate";
  double max_dist = 1000.0;
  int bins = 15;
};

void run_plot_data(const CommonFlags& flags, const PlotFlags& pf) {
  PlotDataRequest req;
  req.kind = pf.kind;
  req.inputs = pf.inputs;
  req.method = pf.method;
  req.max_dist_m = pf.max_dist;
  req.bins = pf.bins;
  req.out_path = flags.out.empty() ? "plot_data.csv" : flags.out;
  emit_plot_data(req);
  std::cout << "wrote " << req.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geostatistical simulation and kriging toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  std::size_t reps_value = 0;
  int threads_value = 0;

  const auto add_common = [&](CLI::App* sub, bool with_reps) {
    sub->add_option("--config", flags.config_path, "key = value configuration file");
    sub->add_option("--seed", seed_value, "override the RNG seed");
    if (with_reps)
      sub->add_option("--replications", reps_value, "override replication count");
    sub->add_option("--threads", threads_value,
                    "worker threads (0 = GEOKRIGE_THREADS or hardware)");
    sub->add_option("--out", flags.out, "output file or directory");
  };

  CLI::App* sim = app.add_subcommand("simulate-field",
                                     "simulate a Gaussian random field grid");
  add_common(sim, false);

  CLI::App* vgm = app.add_subcommand("variogram",
                                     "empirical variogram plus fitted model");
  VariogramFlags vgm_flags;
  add_common(vgm, false);
  vgm->add_option("--points", vgm_flags.points, "point_id,x_m,y_m,value CSV")
      ->required();
  vgm->add_option("--max-dist", vgm_flags.max_dist, "variogram cutoff in meters");
  vgm->add_option("--bins", vgm_flags.bins, "number of lag bins");
  vgm->add_flag("--no-nugget", vgm_flags.no_nugget, "pin the nugget to zero");

  CLI::App* krg = app.add_subcommand("krige", "ordinary kriging at target points");
  KrigeFlags krige_flags;
  add_common(krg, false);
  krg->add_option("--points", krige_flags.points, "point_id,x_m,y_m,value CSV")
      ->required();
  krg->add_option("--targets", krige_flags.targets, "CSV with x_m,y_m columns")
      ->required();
  krg->add_option("--c0", krige_flags.c0, "nugget variance");
  krg->add_option("--psill", krige_flags.psill, "partial sill");
  krg->add_option("--range", krige_flags.range_m, "effective range in meters");
  krg->add_flag("--estimate", krige_flags.estimate,
                "fit the model from the points instead of --c0/--psill/--range");
  krg->add_option("--max-dist", krige_flags.max_dist, "variogram cutoff for --estimate");
  krg->add_option("--bins", krige_flags.bins, "lag bins for --estimate");
  krg->add_option("--max-neighbors", krige_flags.max_neighbors, "neighbors per target");
  krg->add_option("--max-radius", krige_flags.max_radius,
                  "search radius in meters (0 = unlimited)");
  krg->add_option("--min-neighbors", krige_flags.min_neighbors,
                  "fewer neighbors than this fails the target");

  CLI::App* scn = app.add_subcommand("run-scenario",
                                     "simulate, replicate, krige and score");
  add_common(scn, true);

  CLI::App* cs = app.add_subcommand("run-case-study",
                                    "nested-sample prediction study on a CSV dataset");
  add_common(cs, false);

  CLI::App* plot = app.add_subcommand("emit-plot-data",
                                      "tidy CSVs for plotting results");
  PlotFlags plot_flags;
  add_common(plot, false);
  plot->add_option("--kind", plot_flags.kind,
                   "variogram | bias_by_range | quintile_reliability")
      ->required();
  plot->add_option("--inputs", plot_flags.inputs,
                   "points CSV or scenario output directories")
      ->required();
  plot->add_option("--method", plot_flags.method, "method row filter");
  plot->add_option("--max-dist", plot_flags.max_dist, "variogram cutoff");
  plot->add_option("--bins", plot_flags.bins, "variogram lag bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const auto given = [&](const char* name) {
    const CLI::Option* o = active->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--seed")) flags.seed = seed_value;
  if (given("--replications")) flags.replications = reps_value;
  if (given("--threads")) flags.threads = threads_value;

  try {
    if (app.got_subcommand(sim)) run_simulate_field(flags);
    else if (app.got_subcommand(vgm)) run_variogram(flags, vgm_flags);
    else if (app.got_subcommand(krg)) run_krige(flags, krige_flags);
    else if (app.got_subcommand(scn)) run_scenario_cmd(flags);
    else if (app.got_subcommand(cs)) run_case_study_cmd(flags);
    else if (app.got_subcommand(plot)) run_plot_data(flags, plot_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
