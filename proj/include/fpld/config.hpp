#pragma once

// Flat key = value experiment files with optional [section] headers.
// Section names only group keys; every key must be unique in the file.
// '#' starts a comment.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fpld/sim.hpp"

namespace fpld {

class Config {
 public:
  std::optional<std::string> get(const std::string& key);  // marks the key used
  void set(const std::string& key, std::string value);
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  /// Keys that were never read; callers treat them as typos.
  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

/// Throws InvalidParameter with the line number on malformed input.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

std::vector<double> parse_double_list(std::string_view s);
std::vector<int> parse_int_list(std::string_view s);
double parse_double(std::string_view s);  // accepts inf
long long parse_int(std::string_view s);

/// Reads the SimConfig keys present in `cfg` into `sim`.
void apply_sim_config(Config& cfg, SimConfig& sim);

/// Serializes every SimConfig field as key = value lines; parsing the
/// text back with apply_sim_config reproduces `sim` exactly.
std::string sim_config_text(const SimConfig& sim);

/// %.17g
std::string format_double(double x);

}  // namespace fpld
