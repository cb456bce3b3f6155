#include "gplab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gplab/config.hpp"
#include "gplab/error.hpp"

namespace gplab {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + target.string() + "': " + ec.message());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

Json fit_json(const std::optional<LineFit>& fit) {
  if (!fit) return nullptr;
  return Json{{"slope", number(fit->slope)},
              {"intercept", number(fit->intercept)},
              {"slope_se", number(fit->slope_se)},
              {"points", fit->points}};
}

}  // namespace

std::string path_csv(const GridFunction& f) {
  std::string out = f.grid().dimension() == 1 ? "t,value\n" : "x,y,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto p = f.grid().node(i);
    out += num(p[0]) + ",";
    if (f.grid().dimension() == 2) out += num(p[1]) + ",";
    out += num(f[i]) + "\n";
  }
  return out;
}

std::string smallball_csv(const SmallBallEstimate& est) {
  std::string out = "eps,hits,p_hat,exponent,exponent_lo,exponent_hi,censored\n";
  for (const auto& e : est.entries)
    out += num(e.eps) + "," + std::to_string(e.hits) + "," + num(e.p_hat) + "," + num(e.exponent) + "," +
           num(e.exponent_ci.lo) + "," + num(e.exponent_ci.hi) + "," + (e.censored ? "1" : "0") + "\n";
  return out;
}

std::string profile_csv(const ConcentrationProfile& profile) {
  std::string out = "eps,D,S,phi,provenance\n";
  for (const auto& e : profile.entries())
    out += num(e.eps) + "," + num(e.D) + "," + num(e.S) + "," + num(e.phi) + ",D=" + e.provenance_D +
           ";S=" + e.provenance_S + (e.censored ? ";censored" : "") + "\n";
  return out;
}

std::string rate_csv(const RateSolution& sol) {
  std::string out = "n,eps_n,slope_partial\n";
  for (const auto& p : sol.points)
    out += num(p.n) + "," + (p.eps_n ? num(*p.eps_n) : std::string("nan")) + "," + num(p.slope_partial) + "\n";
  return out;
}

std::string decentering_csv(const std::vector<DecenteringResult>& profile) {
  std::string out = "eps,value,witness_norm,constraint_achieved\n";
  for (const auto& d : profile)
    out += num(d.eps) + "," + num(d.value) + "," + num(d.witness_norm()) + "," + num(d.constraint_achieved) + "\n";
  return out;
}

std::string experiment_csv(const ExperimentReport& report) {
  std::string out = "n,replicate,distance\n";
  for (const auto& p : report.points)
    for (std::size_t r = 0; r < p.replicate_distances.size(); ++r)
      out += num(p.n) + "," + std::to_string(r) + "," + num(p.replicate_distances[r]) + "\n";
  return out;
}

Json to_json(const SmallBallEstimate& est) {
  Json entries = Json::array();
  for (const auto& e : est.entries)
    entries.push_back({{"eps", number(e.eps)},
                       {"hits", e.hits},
                       {"p_hat", number(e.p_hat)},
                       {"exponent", number(e.exponent)},
                       {"exponent_ci", {number(e.exponent_ci.lo), number(e.exponent_ci.hi)}},
                       {"censored", e.censored}});
  return Json{{"norm", to_string(est.norm)},
              {"reps", est.reps},
              {"seed", est.seed},
              {"provenance", "MC"},
              {"entries", entries}};
}

Json to_json(const ConcentrationProfile& profile) {
  Json entries = Json::array();
  for (const auto& e : profile.entries())
    entries.push_back({{"eps", number(e.eps)},
                       {"D", number(e.D)},
                       {"S", number(e.S)},
                       {"phi_raw", number(e.phi_raw)},
                       {"phi", number(e.phi)},
                       {"provenance_D", e.provenance_D},
                       {"provenance_S", e.provenance_S},
                       {"censored", e.censored}});
  return Json{{"entries", entries}};
}

Json to_json(const RateSolution& sol) {
  Json pts = Json::array();
  for (const auto& p : sol.points)
    pts.push_back({{"n", number(p.n)},
                   {"eps_n", p.eps_n ? number(*p.eps_n) : Json(nullptr)},
                   {"bracket", {number(p.bracket_lo), number(p.bracket_hi)}},
                   {"slope_partial", number(p.slope_partial)},
                   {"note", p.note},
                   {"provenance", "optimizer-upper-bound"}});
  return Json{{"points", pts},
              {"fit", fit_json(sol.fit)},
              {"target_slope", sol.target_slope ? number(*sol.target_slope) : Json(nullptr)}};
}

Json to_json(const ExperimentReport& report) {
  const auto& s = report.spec;
  Json per_n = Json::array();
  for (const auto& p : report.points) {
    Json reps = Json::array();
    for (double d : p.replicate_distances) reps.push_back(number(d));
    per_n.push_back({{"n", number(p.n)},
                     {"level", p.level},
                     {"replicate_distances", reps},
                     {"quantile_summary",
                      p.error.empty() ? Json{{"mean", number(p.mean)}, {"median_over_replicates", number(p.median)}}
                                      : Json(nullptr)},
                     {"warnings", p.warnings},
                     {"error", p.error},
                     {"provenance", "MC"}});
  }
  Json ladder = Json::array();
  for (double n : s.n_ladder) ladder.push_back(number(n));
  return Json{{"setting", to_string(s.setting)},
              {"prior", s.prior ? s.prior->describe()
                                : "wavelet(d=1,a=" + format_double(s.wavelet_a) +
                                      ",alpha=" + format_double(s.wavelet_alpha) + ",J=" +
                                      (s.wavelet_J ? std::to_string(*s.wavelet_J) : std::string("auto")) + ")"},
              {"w0", s.truth.describe()},
              {"n_ladder", ladder},
              {"quantile", number(s.quantile)},
              {"replicates", s.replicates},
              {"per_n", per_n},
              {"fit", fit_json(report.fit)},
              {"fitted_slope", report.fit ? number(report.fit->slope) : Json(nullptr)},
              {"slope_ci", report.fit ? Json{number(report.slope_ci.lo), number(report.slope_ci.hi)} : Json(nullptr)},
              {"target_slope", report.target.slope ? number(*report.target.slope) : Json(nullptr)},
              {"target_rule", report.target.rule},
              {"seeds", {{"master", s.seed}, {"data", "child(master,\"data\",replicate)"},
                         {"posterior", "child(master,\"posterior\",replicate)"}}}};
}

}  // namespace gplab
