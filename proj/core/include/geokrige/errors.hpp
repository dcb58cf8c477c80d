#pragma once

#include <stdexcept>
#include <string>

namespace geokrige {

/// Bad or infeasible configuration; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unusable input data (missing files, malformed rows); maps to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geokrige
