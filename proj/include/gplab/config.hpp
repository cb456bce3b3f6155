#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gplab/concentration.hpp"
#include "gplab/experiment.hpp"
#include "gplab/grid.hpp"
#include "gplab/prior.hpp"

namespace gplab {

/// Flat `key = value` text with optional `[section]` headers that prefix the
/// keys below them. `#` starts a comment. Keys are read through typed getters;
/// every key read (or defaulted) is recorded so that unknown keys can be
/// rejected and the resolved configuration echoed.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt);
  std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::vector<double> get_doubles(const std::string& key);

  /// Marks a key as known without reading it (flags that live outside the report).
  void ignore(const std::string& key);
  /// Throws ConfigError naming every key that no getter consumed.
  void reject_unknown() const;

  /// Keys read so far with the values used, defaults included.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  /// "key = value" lines of resolved(), sorted.
  std::string canonical() const;
  std::string hash_hex() const;

 private:
  std::string take(const std::string& key, const std::optional<std::string>& fallback, const char* type);
  std::map<std::string, std::string> raw_;
  std::map<std::string, int> line_;
  std::map<std::string, std::string> resolved_;
  std::map<std::string, bool> used_;
  std::string origin_;
};

std::string format_double(double v);  // %.17g

PriorSpec prior_from_config(Config& cfg, const std::string& prefix = "prior");
std::vector<std::pair<std::string, std::string>> prior_to_config(const PriorSpec& spec,
                                                                 const std::string& prefix = "prior");
TruthSpec truth_from_config(Config& cfg);
Grid grid_from_config(Config& cfg, std::size_t default_m = 512);
/// eps.values, or eps.min / eps.max / eps.count log-spaced.
std::vector<double> eps_from_config(Config& cfg);
ExperimentSpec experiment_from_config(Config& cfg);

}  // namespace gplab
