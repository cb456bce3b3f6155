// gplab command-line front end.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "gplab/check.hpp"
#include "gplab/concentration.hpp"
#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/experiment.hpp"
#include "gplab/parallel.hpp"
#include "gplab/process.hpp"
#include "gplab/report.hpp"
#include "gplab/rkhs.hpp"
#include "gplab/seed.hpp"
#include "gplab/version.hpp"

namespace fs = std::filesystem;
using namespace gplab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitCheck = 4;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 0;
  bool quiet = false;
};

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  void stage(const std::string& name) {
    auto now = Clock::now();
    if (!current_.empty()) timings_[current_] = std::chrono::duration<double>(now - since_).count();
    current_ = name;
    since_ = now;
  }
  Json finish() {
    stage("");
    Json j = Json::object();
    for (auto& [k, v] : timings_) j[k] = v;
    return j;
  }

 private:
  std::string current_;
  Clock::time_point since_;
  std::map<std::string, double> timings_;
};

// A run owns its config and the files it will write. Files are staged in
// memory and written atomically once the computation has succeeded.
struct Run {
  std::string command;
  Flags flags;
  Config cfg;
  Stopwatch clock;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> files;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  void add(const std::string& name, const std::string& content) { files.emplace_back(name, content); }

  Json header() const {
    Json cfg_json = Json::object();
    for (const auto& [k, v] : cfg.resolved()) cfg_json[k] = v;
    return Json{{"command", command}, {"config", cfg_json}, {"config_hash", cfg.hash_hex()},
                {"seed", seed}, {"version", kVersion}};
  }

  void write() {
    fs::create_directories(flags.out);
    for (const auto& [name, content] : files) write_atomic((fs::path(flags.out) / name).string(), content);
    Json manifest{{"artifact_version", kVersion},
                  {"command", command},
                  {"config_hash", cfg.hash_hex()},
                  {"master_seed", seed},
                  {"seed_derivation", kSeedDerivation},
                  {"threads", flags.threads},
                  {"wall_clock_seconds",
                   std::chrono::duration<double>(std::chrono::system_clock::now() - started).count()},
                  {"stage_timings", clock.finish()}};
    Json outputs = Json::array();
    for (const auto& f : files) outputs.push_back(f.first);
    manifest["outputs"] = outputs;
    write_atomic((fs::path(flags.out) / "manifest.json").string(), dump_json(manifest));
  }

  void say(const std::string& line) const {
    if (!flags.quiet) std::cout << line << "\n";
  }
};

Config load_config(const Flags& flags, bool required) {
  Config cfg = flags.config.empty() ? Config::parse("", "<none>") : Config::load(flags.config);
  if (required && flags.config.empty()) throw ConfigError("--config is required for this command");
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  return cfg;
}

NormKind norm_key(Config& cfg, const std::string& key) { return parse_norm_kind(cfg.get_string(key, "sup")); }

// ---- commands: each returns a compute closure after validating the config ----

using Compute = std::function<int(Run&)>;

Compute cmd_sample(Run& run) {
  PriorSpec prior = prior_from_config(run.cfg);
  Grid grid = grid_from_config(run.cfg);
  auto paths = run.cfg.get_int("sample.paths", 1);
  if (paths < 1 || paths > 100000) throw ConfigError("sample.paths must lie in [1, 100000]");
  return [=](Run& r) {
    PathSampler sampler(prior, grid);
    std::vector<std::string> csv(static_cast<std::size_t>(paths));
    parallel_for(csv.size(), r.flags.threads, [&](std::size_t i) {
      std::uint64_t s = paths == 1 ? r.seed : child_seed(r.seed, "path", i);
      csv[i] = path_csv(sampler.draw(s));
    });
    for (std::size_t i = 0; i < csv.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "path_%04zu.csv", i);
      r.add(paths == 1 ? "path.csv" : name, csv[i]);
    }
    r.say("sampled " + std::to_string(paths) + " path(s) of " + prior.describe() + " on " +
          std::to_string(grid.size()) + " nodes");
    return 0;
  };
}

Compute cmd_smallball(Run& run) {
  PriorSpec prior = prior_from_config(run.cfg);
  Grid grid = grid_from_config(run.cfg);
  auto eps = eps_from_config(run.cfg);
  auto reps = run.cfg.get_int("smallball.reps", 10000);
  NormKind norm = norm_key(run.cfg, "smallball.norm");
  SlopeWindow window{static_cast<std::size_t>(run.cfg.get_int("smallball.min_hits", 5)),
                     run.cfg.get_double("smallball.min_exponent", 0.0)};
  if (reps < 1) throw ConfigError("smallball.reps must be positive");
  return [=](Run& r) {
    auto est = small_ball(prior, grid, norm, eps, static_cast<std::size_t>(reps), r.seed, r.flags.threads);
    Json rep = r.header();
    rep["prior"] = prior.describe();
    rep["small_ball"] = to_json(est);
    try {
      auto fit = small_ball_slope(est, window);
      rep["slope_fit"] = {{"slope", number(fit.slope)}, {"slope_se", number(fit.slope_se)},
                          {"points", fit.points}, {"provenance", "MC"}};
      r.say("small-ball slope " + format_double(fit.slope) + " over " + std::to_string(fit.points) + " points");
    } catch (const DomainError& e) {
      rep["slope_fit"] = nullptr;
      r.say(std::string("no slope fit: ") + e.what());
    }
    r.add("smallball.csv", smallball_csv(est));
    r.add("smallball.json", dump_json(rep));
    return 0;
  };
}

struct ProfileJob {
  std::optional<PriorSpec> prior;
  std::optional<WaveletSeries> wavelet;
  TruthSpec truth;
  Grid grid{1, 2};
  std::vector<double> eps;
  ProfileOptions options;
};

ProfileJob profile_job(Config& cfg) {
  ProfileJob job;
  PriorSpec prior = prior_from_config(cfg);
  job.truth = truth_from_config(cfg);
  job.grid = grid_from_config(cfg);
  job.eps = eps_from_config(cfg);
  job.options.norm = norm_key(cfg, "concentration.norm");
  job.options.reps = static_cast<std::size_t>(cfg.get_int("concentration.reps", 10000));
  if (prior.is<WaveletSeries>()) {
    job.wavelet = prior.as<WaveletSeries>();
    if (job.wavelet->d != 1) throw ConfigError("concentration with a wavelet prior needs prior.d = 1");
    job.options.wavelet_closed_form = cfg.get_bool("concentration.wavelet_closed_form", true);
  } else {
    if (job.grid.dimension() != 1) throw ConfigError("kernel priors need grid.d = 1");
  }
  job.prior = prior;
  return job;
}

ConcentrationProfile run_profile(const ProfileJob& job, std::uint64_t seed, int threads) {
  ProfileOptions o = job.options;
  o.seed = seed;
  o.threads = threads;
  if (job.wavelet) return assemble_profile(job.truth.coefficients_on(job.wavelet->J), *job.wavelet, job.eps, o);
  return assemble_profile(GridFunction::sample(job.grid, job.truth.function()), *job.prior, job.eps, o);
}

Compute cmd_concentration(Run& run) {
  ProfileJob job = profile_job(run.cfg);
  std::optional<std::vector<double>> ladder;
  double tol = 1e-3;
  if (run.cfg.has("rate.n")) {
    ladder = run.cfg.get_doubles("rate.n");
    tol = run.cfg.get_double("rate.tolerance", 1e-3);
  }
  return [=](Run& r) {
    auto profile = run_profile(job, r.seed, r.flags.threads);
    Json rep = r.header();
    rep["prior"] = job.prior->describe();
    rep["w0"] = job.truth.describe();
    rep["profile"] = to_json(profile);
    r.add("profile.csv", profile_csv(profile));
    if (job.wavelet)
      r.add("decentering.csv", decentering_csv(decentering_profile(job.truth.coefficients_on(job.wavelet->J),
                                                                   *job.wavelet, job.eps, job.options.norm)));
    else
      r.add("decentering.csv", decentering_csv(decentering_profile(GridFunction::sample(job.grid, job.truth.function()),
                                                                   *job.prior, job.eps, job.options.norm)));
    if (ladder) {
      auto sol = solve_rate(profile, *ladder, tol);
      rep["rate"] = to_json(sol);
      r.add("rate.csv", rate_csv(sol));
    }
    r.add("concentration.json", dump_json(rep));
    r.say("profile with " + std::to_string(profile.entries().size()) + " entries");
    return 0;
  };
}

Compute cmd_rate(Run& run) {
  const std::string kind = run.cfg.get_string("profile.kind");
  auto ladder = run.cfg.get_doubles("rate.n");
  double tol = run.cfg.get_double("rate.tolerance", 1e-3);
  if (kind == "power") {
    double e = run.cfg.get_double("profile.exponent");
    double c = run.cfg.get_double("profile.scale", 1.0);
    double lo = run.cfg.get_double("rate.eps_lo", 1e-12), hi = run.cfg.get_double("rate.eps_hi", 1e3);
    if (!(e >= 0.0 && c > 0.0)) throw ConfigError("power profile needs profile.exponent >= 0 and profile.scale > 0");
    return [=](Run& r) {
      auto sol = solve_rate([=](double x) { return c * std::pow(x, -e); }, lo, hi, ladder, tol);
      sol.target_slope = -1.0 / (2.0 + e);
      Json rep = r.header();
      rep["profile"] = {{"kind", "power"}, {"phi", "scale*eps^-exponent"}, {"provenance", "closed-form"}};
      rep["rate"] = to_json(sol);
      r.add("rate.csv", rate_csv(sol));
      r.add("rate.json", dump_json(rep));
      if (sol.fit) r.say("rate slope " + format_double(sol.fit->slope) + " (target " + format_double(-1.0 / (2.0 + e)) + ")");
      return 0;
    };
  }
  if (kind == "concentration") {
    ProfileJob job = profile_job(run.cfg);
    return [=](Run& r) {
      auto profile = run_profile(job, r.seed, r.flags.threads);
      auto sol = solve_rate(profile, ladder, tol);
      Json rep = r.header();
      rep["profile"] = to_json(profile);
      rep["rate"] = to_json(sol);
      r.add("profile.csv", profile_csv(profile));
      r.add("rate.csv", rate_csv(sol));
      r.add("rate.json", dump_json(rep));
      if (sol.fit) r.say("rate slope " + format_double(sol.fit->slope));
      return 0;
    };
  }
  throw ConfigError("profile.kind must be power or concentration");
}

Compute cmd_experiment(Run& run) {
  ExperimentSpec spec = experiment_from_config(run.cfg);
  return [=](Run& r) mutable {
    spec.threads = r.flags.threads;
    auto report = contraction_experiment(spec);
    Json rep = r.header();
    rep["experiment"] = to_json(report);
    r.add("experiment.json", dump_json(rep));
    r.add("experiment.csv", experiment_csv(report));
    std::string line = std::string(to_string(spec.setting)) + ": slope ";
    line += report.fit ? format_double(report.fit->slope) : std::string("n/a");
    if (report.target.slope) line += " (target " + format_double(*report.target.slope) + ")";
    r.say(line);
    for (const auto& p : report.points)
      if (!p.error.empty()) r.say("  n=" + format_double(p.n) + " failed: " + p.error);
    return 0;
  };
}

Compute cmd_check(Run& run) {
  CheckTolerances tol;
  tol.power_rule = run.cfg.get_double("tolerance.power_rule", tol.power_rule);
  tol.semigroup = run.cfg.get_double("tolerance.semigroup", tol.semigroup);
  tol.round_trip = run.cfg.get_double("tolerance.round_trip", tol.round_trip);
  tol.inequality_slack = run.cfg.get_double("tolerance.inequality_slack", tol.inequality_slack);
  tol.logistic = run.cfg.get_double("tolerance.logistic", tol.logistic);
  tol.conjugate = run.cfg.get_double("tolerance.conjugate", tol.conjugate);
  tol.rate = run.cfg.get_double("tolerance.rate", tol.rate);
  tol.kernel = run.cfg.get_double("tolerance.kernel", tol.kernel);
  tol.grid_m = static_cast<std::size_t>(run.cfg.get_int("check.grid_m", 4096));
  tol.random_pairs = static_cast<std::size_t>(run.cfg.get_int("check.random_pairs", 1000));
  return [=](Run& r) {
    auto results = run_checks(tol, r.seed, r.flags.threads);
    Json list = Json::array();
    bool ok = true;
    for (const auto& c : results) {
      ok = ok && c.pass;
      list.push_back({{"name", c.name}, {"value", number(c.value)}, {"threshold", number(c.threshold)},
                      {"pass", c.pass}, {"detail", c.detail}});
      r.say(std::string(c.pass ? "PASS " : "FAIL ") + c.name + ": " + format_double(c.value) +
            " <= " + format_double(c.threshold));
    }
    Json rep = r.header();
    rep["checks"] = list;
    rep["all_pass"] = ok;
    r.add("check.json", dump_json(rep));
    return ok ? 0 : kExitCheck;
  };
}

int execute(const std::string& command, const Flags& flags) {
  Run run;
  run.command = command;
  run.flags = flags;
  Compute compute;
  run.clock.stage("validate");
  try {
    run.cfg = load_config(flags, command != "check");
    run.seed = run.cfg.get_u64("seed", 0);
    if (command == "sample") compute = cmd_sample(run);
    if (command == "smallball") compute = cmd_smallball(run);
    if (command == "concentration") compute = cmd_concentration(run);
    if (command == "rate") compute = cmd_rate(run);
    if (command == "experiment") compute = cmd_experiment(run);
    if (command == "check") compute = cmd_check(run);
    run.cfg.reject_unknown();
  } catch (const Error& e) {
    std::cerr << "gplab " << command << ": config error: " << e.what() << "\n";
    return kExitConfig;
  }
  int code = 0;
  try {
    run.clock.stage("compute");
    code = compute(run);
    run.clock.stage("write");
    run.write();
  } catch (const Error& e) {
    std::cerr << "gplab " << command << ": compute error: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "gplab " << command << ": error: " << e.what() << "\n";
    return kExitCompute;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gplab: Gaussian process prior experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--config", flags.config, "config file");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--threads", flags.threads, "worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", flags.quiet, "suppress the summary on stdout");
  app.set_version_flag("--version", kVersion);

  const char* commands[][2] = {{"sample", "draw prior sample paths"},
                               {"smallball", "Monte Carlo small-ball probabilities"},
                               {"concentration", "concentration-function profile"},
                               {"rate", "solve phi(eps) = n eps^2 over an n ladder"},
                               {"experiment", "posterior contraction experiment"},
                               {"check", "run the invariant suite"}};
  std::string chosen;
  for (auto& c : commands) {
    auto* sub = app.add_subcommand(c[0], c[1]);
    sub->fallthrough();
    sub->callback([&chosen, name = std::string(c[0])] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*seed_opt) flags.seed = seed;
  return execute(chosen, flags);
}
