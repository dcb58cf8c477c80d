#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geokrige/dataset.hpp"
#include "geokrige/random_field.hpp"

namespace geokrige {

/// Comma-separated table with a mandatory header row. Lines starting with '#'
/// are metadata (key = value) and collected separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> metadata;

  int column(const std::string& name) const;  // -1 when absent
};

/// Throws DataError when the file cannot be read or has no header.
CsvTable read_csv(const std::string& path);

/// Formats with six significant digits; non-finite values print as nan/inf.
std::string format_number(double v);

/// Single-variable point file with columns point_id,x_m,y_m,value.
/// Rows that fail to parse are skipped with a warning; more than 1% bad rows
/// aborts with DataError.
SpatialDataset read_point_csv(const std::string& path,
                              std::vector<std::string>* warnings = nullptr);

/// Three collocated variables per row. Column names are configurable; each
/// row expands to three observations sharing point_id and location with
/// variable_id 0, 1, 2. Same bad-row policy as read_point_csv.
SpatialDataset read_multi_point_csv(const std::string& path,
                                    const std::string& id_col,
                                    const std::string& x_col,
                                    const std::string& y_col,
                                    const std::array<std::string, 3>& var_cols,
                                    std::vector<std::string>* warnings = nullptr);

/// Writer that prepends "# key = value" metadata lines before the header.
void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& metadata,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_realization_csv(const std::string& path, const FieldRealization& field);
void write_realization_csv(const std::string& path, const MultiFieldRealization& multi);

}  // namespace geokrige
