#pragma once

#include <map>
#include <set>
#include <string>

namespace geokrige {

/// Flat "key = value" configuration text. '#' starts a comment; blank lines
/// are skipped. Keys are tracked so consumers can reject unknown ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv_text(const std::string& text);
/// Throws ConfigError when the file cannot be read.
KeyValues parse_kv_file(const std::string& path);

/// Typed readers; throw ConfigError on malformed values. Each get marks the
/// key as consumed so unknown_keys() can report leftovers (typo protection).
class ConfigReader {
 public:
  explicit ConfigReader(KeyValues kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key, long long fallback);
  bool get_bool(const std::string& key, bool fallback);

  /// Keys never read by any getter; non-empty means a typo or wrong file.
  std::set<std::string> unknown_keys() const;

 private:
  KeyValues kv_;
  std::set<std::string> consumed_;
};

}  // namespace geokrige
