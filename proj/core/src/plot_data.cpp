#include "geokrige/plot_data.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <map>

#include "geokrige/csv.hpp"
#include "geokrige/errors.hpp"
#include "geokrige/variogram_fit.hpp"

namespace geokrige {

namespace {

double parse_cell(const std::string& s, const std::string& what) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("cannot parse " + what + " value '" + s + "'");
  }
}

int required_column(const CsvTable& table, const std::string& name,
                    const std::string& path) {
  const int c = table.column(name);
  if (c < 0) throw DataError(path + " is missing column " + name);
  return c;
}

std::string metadata_or(const CsvTable& table, const std::string& key,
                        const std::string& fallback) {
  const auto it = table.metadata.find(key);
  return it == table.metadata.end() ? fallback : it->second;
}

void emit_variogram(const PlotDataRequest& req) {
  if (req.inputs.size() != 1)
    throw ConfigError("variogram plot data needs exactly one points CSV");
  const SpatialDataset obs = read_point_csv(req.inputs[0]);
  if (obs.size() < 2)
    throw DataError(req.inputs[0] + " has fewer than two usable points");
  const EmpiricalVariogram emp = empirical_variogram(obs, req.max_dist_m, req.bins);
  const ScreenedFit sf =
      fit_exponential_screened(emp, obs.value_variance(), req.fit_nugget);

  std::vector<std::pair<std::string, std::string>> md = {
      {"kind", "variogram"},
      {"source", req.inputs[0]},
      {"max_dist_m", format_number(emp.max_dist)},
      {"n_bins", std::to_string(emp.n_bins)},
      {"fit_c0", format_number(sf.fit.model.c0)},
      {"fit_psill", format_number(sf.fit.model.psill)},
      {"fit_theta", format_number(sf.fit.model.theta)},
      {"fit_range3_m", format_number(range3(sf.fit.model))},
      {"fit_converged", sf.fit.diag.converged ? "true" : "false"},
      {"fit_valid", sf.valid ? "true" : "false"},
  };
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : emp.bins) {
    // The fit evaluates at the mean pair distance, so the curve column does too.
    const double h = b.mean_dist > 0.0 ? b.mean_dist : b.lag_center;
    rows.push_back({format_number(b.lag_center), format_number(b.mean_dist),
                    format_number(b.gamma_hat), std::to_string(b.n_pairs),
                    format_number(model_gamma(sf.fit.model, h))});
  }
  write_csv(req.out_path, md,
            {"lag_center_m", "mean_dist_m", "gamma_hat", "n_pairs", "model_gamma"},
            rows);
}

void emit_bias_by_range(const PlotDataRequest& req) {
  if (req.inputs.empty())
    throw ConfigError("bias_by_range needs at least one scenario directory");

  std::vector<std::vector<std::string>> rows;
  for (const std::string& dir : req.inputs) {
    const std::string path =
        (std::filesystem::path(dir) / "point_summary.csv").string();
    const CsvTable table = read_csv(path);
    const int c_method = required_column(table, "method", path);
    const int c_true = required_column(table, "true_value", path);
    const int c_bias = required_column(table, "bias_sd_units", path);
    const std::string range_m = metadata_or(table, "range_m", "");
    const std::string mode = metadata_or(table, "variogram_mode", "");
    if (range_m.empty() || mode.empty())
      throw DataError(path + " lacks range_m/variogram_mode metadata");

    for (const auto& row : table.rows) {
      if (row[static_cast<std::size_t>(c_method)] != req.method) continue;
      rows.push_back({row[static_cast<std::size_t>(c_true)],
                      row[static_cast<std::size_t>(c_bias)], range_m, mode});
    }
  }
  write_csv(req.out_path, {{"kind", "bias_by_range"}, {"method", req.method}},
            {"true_value", "mean_bias_sd_units", "range_m", "variogram_mode"}, rows);
}

void emit_quintile_reliability(const PlotDataRequest& req) {
  if (req.inputs.size() != 1)
    throw ConfigError("quintile_reliability needs exactly one scenario directory");
  const std::string path =
      (std::filesystem::path(req.inputs[0]) / "point_summary.csv").string();
  const CsvTable table = read_csv(path);
  const int c_method = required_column(table, "method", path);
  const int c_quintile = required_column(table, "true_quintile", path);
  const int c_correct = required_column(table, "prop_correct", path);
  const int c_neighbor = required_column(table, "prop_correct_or_neighbor", path);

  struct Cell {
    double correct = 0.0, neighbor = 0.0;
    std::size_t n = 0;
  };
  std::map<int, Cell> by_quintile;
  for (const auto& row : table.rows) {
    if (row[static_cast<std::size_t>(c_method)] != req.method) continue;
    const int q = static_cast<int>(
        parse_cell(row[static_cast<std::size_t>(c_quintile)], "true_quintile"));
    const double pc = parse_cell(row[static_cast<std::size_t>(c_correct)], "prop_correct");
    const double pn = parse_cell(row[static_cast<std::size_t>(c_neighbor)],
                                 "prop_correct_or_neighbor");
    if (!std::isfinite(pc) || !std::isfinite(pn)) continue;  // degenerate points
    Cell& cell = by_quintile[q];
    cell.correct += pc;
    cell.neighbor += pn;
    ++cell.n;
  }
  if (by_quintile.empty())
    throw DataError("no rows for method " + req.method + " in " + path);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [q, cell] : by_quintile) {
    rows.push_back({std::to_string(q),
                    format_number(cell.correct / static_cast<double>(cell.n)),
                    format_number(cell.neighbor / static_cast<double>(cell.n))});
  }
  write_csv(req.out_path,
            {{"kind", "quintile_reliability"}, {"method", req.method}},
            {"true_quintile", "prop_correct", "prop_correct_or_neighbor"}, rows);
}

}  // namespace

void emit_plot_data(const PlotDataRequest& req) {
  if (req.out_path.empty()) throw ConfigError("plot data needs an output path");
  if (req.kind == "variogram") {
    emit_variogram(req);
  } else if (req.kind == "bias_by_range") {
    emit_bias_by_range(req);
  } else if (req.kind == "quintile_reliability") {
    emit_quintile_reliability(req);
  } else {
    throw ConfigError("unknown plot data kind '" + req.kind + "'");
  }
}

}  // namespace geokrige
