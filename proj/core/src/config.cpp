#include "geokrige/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "geokrige/errors.hpp"

namespace geokrige {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KeyValues parse_kv_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

std::string ConfigReader::get_string(const std::string& key,
                                     const std::string& fallback) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double ConfigReader::get_double(const std::string& key, double fallback) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (it->second.empty() || end != it->second.c_str() + it->second.size())
    throw ConfigError("config key '" + key + "' is not a number: " + it->second);
  return v;
}

long long ConfigReader::get_int(const std::string& key, long long fallback) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (it->second.empty() || end != it->second.c_str() + it->second.size())
    throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
  return v;
}

bool ConfigReader::get_bool(const std::string& key, bool fallback) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + v);
}

std::set<std::string> ConfigReader::unknown_keys() const {
  std::set<std::string> unknown;
  for (const auto& [k, _] : kv_)
    if (consumed_.count(k) == 0) unknown.insert(k);
  return unknown;
}

}  // namespace geokrige
