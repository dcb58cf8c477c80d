#include "geokrige/csv.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geokrige/errors.hpp"

namespace geokrige {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos)
        table.metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      table.header = split_fields(line);
      have_header = true;
    } else {
      table.rows.push_back(split_fields(line));
    }
  }
  if (!have_header) throw DataError(path + " has no header row");
  return table;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

SpatialDataset dataset_from_table(const CsvTable& table, const std::string& path,
                                  const std::string& id_col, const std::string& x_col,
                                  const std::string& y_col,
                                  const std::vector<std::string>& value_cols,
                                  std::vector<std::string>* warnings) {
  const int ci = table.column(id_col);
  const int cx = table.column(x_col);
  const int cy = table.column(y_col);
  std::vector<int> cv;
  for (const auto& name : value_cols) {
    const int c = table.column(name);
    if (c < 0) throw DataError(path + " is missing column '" + name + "'");
    cv.push_back(c);
  }
  if (ci < 0 || cx < 0 || cy < 0)
    throw DataError(path + " is missing one of the columns '" + id_col + "', '" +
                    x_col + "', '" + y_col + "'");

  std::vector<ObservedPoint> pts;
  std::size_t bad = 0;
  const std::size_t width = table.header.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    int id = 0;
    Location loc;
    std::vector<double> vals(cv.size());
    bool ok = row.size() == width && parse_int(row[static_cast<std::size_t>(ci)], id) &&
              parse_double(row[static_cast<std::size_t>(cx)], loc.x) &&
              parse_double(row[static_cast<std::size_t>(cy)], loc.y);
    for (std::size_t k = 0; ok && k < cv.size(); ++k)
      ok = parse_double(row[static_cast<std::size_t>(cv[k])], vals[k]);
    if (!ok) {
      ++bad;
      if (warnings)
        warnings->push_back(path + " row " + std::to_string(r + 2) + " is malformed");
      continue;
    }
    for (std::size_t k = 0; k < cv.size(); ++k)
      pts.push_back({id, loc, vals[k], static_cast<int>(k)});
  }

  if (table.rows.empty()) throw DataError(path + " has no data rows");
  if (static_cast<double>(bad) > 0.01 * static_cast<double>(table.rows.size()))
    throw DataError(path + ": " + std::to_string(bad) + " of " +
                    std::to_string(table.rows.size()) +
                    " rows are malformed (above the 1% tolerance)");

  SpatialDataset ds{std::move(pts)};
  ds.validate_ids();
  return ds;
}

}  // namespace

SpatialDataset read_point_csv(const std::string& path,
                              std::vector<std::string>* warnings) {
  return dataset_from_table(read_csv(path), path, "point_id", "x_m", "y_m",
                            {"value"}, warnings);
}

SpatialDataset read_multi_point_csv(const std::string& path,
                                    const std::string& id_col,
                                    const std::string& x_col,
                                    const std::string& y_col,
                                    const std::array<std::string, 3>& var_cols,
                                    std::vector<std::string>* warnings) {
  return dataset_from_table(read_csv(path), path, id_col, x_col, y_col,
                            {var_cols[0], var_cols[1], var_cols[2]}, warnings);
}

void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& metadata,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& [k, v] : metadata) out << "# " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw DataError("write failed for " + path);
}

namespace {

std::vector<std::pair<std::string, std::string>> field_metadata(
    const FieldRealization& f) {
  return {
      {"extent_m", format_number(f.extent_m)},
      {"resolution_m", format_number(f.resolution_m)},
      {"n_side", std::to_string(f.n_side)},
      {"nugget", format_number(f.model.c0)},
      {"psill", format_number(f.model.psill)},
      {"theta", format_number(f.model.theta)},
      {"seed", std::to_string(f.seed)},
  };
}

}  // namespace

void write_realization_csv(const std::string& path, const FieldRealization& field) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(field.values.size());
  for (int node = 0; node < field.node_count(); ++node) {
    const Location l = field.node_location(node);
    rows.push_back({format_number(l.x), format_number(l.y),
                    format_number(field.values[static_cast<std::size_t>(node)])});
  }
  write_csv(path, field_metadata(field), {"node_x_m", "node_y_m", "value"}, rows);
}

void write_realization_csv(const std::string& path, const MultiFieldRealization& multi) {
  std::vector<std::vector<std::string>> rows;
  auto metadata = field_metadata(multi.fields[0]);
  metadata.emplace_back("r", format_number(multi.r));
  for (int v = 0; v < 3; ++v) {
    const FieldRealization& f = multi.fields[static_cast<std::size_t>(v)];
    for (int node = 0; node < f.node_count(); ++node) {
      const Location l = f.node_location(node);
      rows.push_back({format_number(l.x), format_number(l.y),
                      format_number(f.values[static_cast<std::size_t>(node)]),
                      std::to_string(v)});
    }
  }
  write_csv(path, metadata, {"node_x_m", "node_y_m", "value", "variable_id"}, rows);
}

}  // namespace geokrige
