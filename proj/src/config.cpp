#include "gplab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gplab/error.hpp"
#include "gplab/seed.hpp"

namespace gplab {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = origin + ":" + std::to_string(number) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) throw ConfigError(where + "bad section name '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (!valid_key(key)) throw ConfigError(where + "bad key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    if (cfg.raw_.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    cfg.raw_[key] = value;
    cfg.line_[key] = number;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("bad key '" + key + "'");
  raw_[key] = value;
}

std::string Config::take(const std::string& key, const std::optional<std::string>& fallback, const char* type) {
  auto it = raw_.find(key);
  std::string v;
  if (it != raw_.end()) {
    v = it->second;
    used_[key] = true;
  } else if (fallback) {
    v = *fallback;
  } else {
    throw ConfigError(origin_ + ": missing required " + type + " key '" + key + "'");
  }
  resolved_[key] = v;
  return v;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* type) {
  throw ConfigError("key '" + key + "': '" + v + "' is not a valid " + type);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "number");
  }
  if (pos != v.size()) bad_value(key, v, "number");
  return d;
}

}  // namespace

std::string Config::get_string(const std::string& key, std::optional<std::string> fallback) {
  return take(key, fallback, "string");
}

double Config::get_double(const std::string& key, std::optional<double> fallback) {
  auto v = take(key, fallback ? std::optional<std::string>(format_double(*fallback)) : std::nullopt, "number");
  double d = parse_double(key, v);
  resolved_[key] = format_double(d);
  return d;
}

std::int64_t Config::get_int(const std::string& key, std::optional<std::int64_t> fallback) {
  auto v = take(key, fallback ? std::optional<std::string>(std::to_string(*fallback)) : std::nullopt, "integer");
  std::size_t pos = 0;
  std::int64_t i = 0;
  try {
    i = std::stoll(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "integer");
  }
  if (pos != v.size()) bad_value(key, v, "integer");
  resolved_[key] = std::to_string(i);
  return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::optional<std::uint64_t> fallback) {
  auto v = take(key, fallback ? std::optional<std::string>(std::to_string(*fallback)) : std::nullopt, "integer");
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    bad_value(key, v, "unsigned integer");
  std::uint64_t u = 0;
  try {
    u = std::stoull(v);
  } catch (const std::exception&) {
    bad_value(key, v, "unsigned integer");
  }
  resolved_[key] = std::to_string(u);
  return u;
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) {
  auto v = take(key, fallback ? std::optional<std::string>(*fallback ? "true" : "false") : std::nullopt, "boolean");
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "boolean (true|false)");
}

std::vector<double> Config::get_doubles(const std::string& key) {
  auto v = take(key, std::nullopt, "list");
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) bad_value(key, v, "comma-separated list");
  std::string canon;
  for (std::size_t i = 0; i < out.size(); ++i) canon += (i ? "," : "") + format_double(out[i]);
  resolved_[key] = canon;
  return out;
}

void Config::ignore(const std::string& key) { used_[key] = true; }

void Config::reject_unknown() const {
  std::string unknown;
  for (const auto& [k, v] : raw_)
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k + " (line " + std::to_string(line_.count(k) ? line_.at(k) : 0) + ")";
  if (!unknown.empty()) throw ConfigError(origin_ + ": unknown keys: " + unknown);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : resolved_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

PriorSpec prior_from_config(Config& cfg, const std::string& p) {
  const std::string kind = cfg.get_string(p + ".kind");
  if (kind == "bm") return PriorSpec::bm();
  if (kind == "released_bm") return PriorSpec::released_bm();
  if (kind == "integrated_bm") return PriorSpec::integrated_bm(static_cast<int>(cfg.get_int(p + ".k", 1)));
  if (kind == "rl_plus_poly") return PriorSpec::rl_plus_poly(cfg.get_double(p + ".alpha"));
  if (kind == "riemann_liouville") return PriorSpec::riemann_liouville(cfg.get_double(p + ".alpha"));
  if (kind == "fbm") return PriorSpec::fbm(cfg.get_double(p + ".alpha"));
  if (kind == "random_polynomial")
    return PriorSpec::random_polynomial(static_cast<int>(cfg.get_int(p + ".degree")),
                                        cfg.get_bool(p + ".factorial_scaled", false));
  if (kind == "wavelet")
    return PriorSpec::wavelet(static_cast<int>(cfg.get_int(p + ".d", 1)), cfg.get_double(p + ".a"),
                              static_cast<int>(cfg.get_int(p + ".J")));
  if (kind == "scaled") {
    PriorSpec base = prior_from_config(cfg, p + ".base");
    if (cfg.has(p + ".scale")) return PriorSpec::scaled(base, cfg.get_double(p + ".scale"));
    return PriorSpec::scaled_uniform(base, cfg.get_double(p + ".scale_lo"), cfg.get_double(p + ".scale_hi"));
  }
  if (kind == "sum") {
    auto count = cfg.get_int(p + ".components");
    if (count < 1 || count > 16) throw ConfigError("key '" + p + ".components' must lie in [1, 16]");
    std::vector<PriorSpec> parts;
    for (std::int64_t i = 0; i < count; ++i) parts.push_back(prior_from_config(cfg, p + ".part" + std::to_string(i)));
    return PriorSpec::sum(std::move(parts));
  }
  throw ConfigError("key '" + p + ".kind': unknown prior '" + kind +
                    "' (bm|released_bm|integrated_bm|rl_plus_poly|riemann_liouville|fbm|random_polynomial|wavelet|"
                    "scaled|sum)");
}

std::vector<std::pair<std::string, std::string>> prior_to_config(const PriorSpec& spec, const std::string& p) {
  std::vector<std::pair<std::string, std::string>> out;
  auto put = [&](const std::string& k, const std::string& v) { out.emplace_back(p + "." + k, v); };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BrownianMotion>) {
          put("kind", "bm");
        } else if constexpr (std::is_same_v<T, ReleasedBM>) {
          put("kind", "released_bm");
        } else if constexpr (std::is_same_v<T, IntegratedBM>) {
          put("kind", "integrated_bm");
          put("k", std::to_string(v.k));
        } else if constexpr (std::is_same_v<T, RLPlusPoly>) {
          put("kind", "rl_plus_poly");
          put("alpha", format_double(v.alpha));
        } else if constexpr (std::is_same_v<T, RiemannLiouville>) {
          put("kind", "riemann_liouville");
          put("alpha", format_double(v.alpha));
        } else if constexpr (std::is_same_v<T, FractionalBM>) {
          put("kind", "fbm");
          put("alpha", format_double(v.alpha));
        } else if constexpr (std::is_same_v<T, RandomPolynomial>) {
          put("kind", "random_polynomial");
          put("degree", std::to_string(v.degree));
          put("factorial_scaled", v.factorial_scaled ? "true" : "false");
        } else if constexpr (std::is_same_v<T, WaveletSeries>) {
          put("kind", "wavelet");
          put("d", std::to_string(v.d));
          put("a", format_double(v.a));
          put("J", std::to_string(v.J));
        } else if constexpr (std::is_same_v<T, Scaled>) {
          put("kind", "scaled");
          if (auto* f = std::get_if<FixedScale>(&v.law)) {
            put("scale", format_double(f->a));
          } else {
            const auto& u = std::get<UniformScale>(v.law);
            put("scale_lo", format_double(u.lo));
            put("scale_hi", format_double(u.hi));
          }
          for (auto& kv : prior_to_config(*v.base, p + ".base")) out.push_back(kv);
        } else {
          put("kind", "sum");
          put("components", std::to_string(v.components.size()));
          for (std::size_t i = 0; i < v.components.size(); ++i)
            for (auto& kv : prior_to_config(v.components[i], p + ".part" + std::to_string(i))) out.push_back(kv);
        }
      },
      spec.variant());
  return out;
}

TruthSpec truth_from_config(Config& cfg) {
  TruthSpec t;
  t.family = cfg.get_string("truth.family", "cusp");
  if (t.family == "cusp") {
    t.amplitude = cfg.get_double("truth.amplitude", 1.0);
    t.center = cfg.get_double("truth.center", 0.5);
    t.exponent = cfg.get_double("truth.exponent", 0.5);
  } else if (t.family == "sine") {
    t.amplitude = cfg.get_double("truth.amplitude", 1.0);
    t.frequency = cfg.get_double("truth.frequency", 1.0);
  } else if (t.family == "linear") {
    t.intercept = cfg.get_double("truth.intercept", 0.0);
    t.slope = cfg.get_double("truth.slope", 1.0);
  } else if (t.family == "besov") {
    t.amplitude = cfg.get_double("truth.amplitude", 1.0);
    t.beta = cfg.get_double("truth.beta", 1.0);
  } else if (t.family == "coefficients") {
    t.coefficients = cfg.get_doubles("truth.coefficients");
  }
  t.j_obs = static_cast<int>(cfg.get_int("truth.j_obs", 18));
  t.validate();
  return t;
}

Grid grid_from_config(Config& cfg, std::size_t default_m) {
  auto d = cfg.get_int("grid.d", 1);
  auto m = cfg.get_int("grid.m", static_cast<std::int64_t>(default_m));
  if (m < 2) throw ConfigError("grid.m must be at least 2");
  try {
    return Grid(static_cast<int>(d), static_cast<std::size_t>(m));
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

std::vector<double> eps_from_config(Config& cfg) {
  std::vector<double> eps;
  if (cfg.has("eps.values")) {
    eps = cfg.get_doubles("eps.values");
  } else {
    double lo = cfg.get_double("eps.min"), hi = cfg.get_double("eps.max");
    auto count = cfg.get_int("eps.count", 8);
    if (!(lo > 0.0 && hi >= lo) || count < 1) throw ConfigError("eps: need 0 < eps.min <= eps.max and eps.count >= 1");
    eps = log_spaced(lo, hi, static_cast<std::size_t>(count));
  }
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  return eps;
}

ExperimentSpec experiment_from_config(Config& cfg) {
  ExperimentSpec s;
  s.setting = parse_setting(cfg.get_string("experiment.setting"));
  s.n_ladder = cfg.get_doubles("experiment.n");
  s.replicates = static_cast<std::size_t>(cfg.get_int("experiment.replicates", 16));
  s.quantile = cfg.get_double("experiment.quantile", 0.5);
  s.posterior_draws = static_cast<std::size_t>(cfg.get_int("experiment.posterior_draws", 200));
  s.seed = cfg.get_u64("seed", 0);
  s.truth = truth_from_config(cfg);
  if (s.setting == Setting::Regression) {
    s.prior = prior_from_config(cfg);
    s.sigma0 = cfg.get_double("regression.sigma0", 0.5);
    s.sigma_lo = cfg.get_double("regression.sigma_lo", 0.25);
    s.sigma_hi = cfg.get_double("regression.sigma_hi", 1.0);
    s.sigma_points = static_cast<std::size_t>(cfg.get_int("regression.sigma_points", 64));
    s.include_sigma = cfg.get_bool("regression.include_sigma", true);
  } else {
    if (cfg.get_string("prior.kind", "wavelet") != "wavelet")
      throw ConfigError("setting '" + std::string(to_string(s.setting)) + "' needs prior.kind = wavelet");
    if (cfg.get_int("prior.d", 1) != 1) throw ConfigError("experiments use d = 1 wavelet priors");
    s.wavelet_a = cfg.get_double("prior.a", 1.0);
    s.wavelet_alpha = cfg.get_double("prior.alpha", s.wavelet_a);
    auto J = cfg.get_string("prior.J", "auto");
    if (J != "auto") s.wavelet_J = static_cast<int>(cfg.get_int("prior.J"));
    if (s.setting == Setting::Density || s.setting == Setting::Classification) {
      s.mcmc.iterations = static_cast<std::size_t>(cfg.get_int("mcmc.iterations", 20000));
      s.mcmc.burnin = static_cast<std::size_t>(cfg.get_int("mcmc.burnin", 5000));
      s.mcmc.thin = static_cast<std::size_t>(cfg.get_int("mcmc.thin", 10));
      s.mcmc.proposal_scale = cfg.get_double("mcmc.proposal_scale", 1.0);
      s.mcmc.adapt = cfg.get_bool("mcmc.adapt", true);
    }
    if (s.setting == Setting::Density)
      s.density_cells = static_cast<std::size_t>(cfg.get_int("experiment.density_cells", 4096));
  }
  try {
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

}  // namespace gplab
