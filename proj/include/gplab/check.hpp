#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gplab {

struct CheckResult {
  std::string name;
  double value = 0.0;      // observed error or statistic
  double threshold = 0.0;  // pass when value <= threshold
  bool pass = false;
  std::string detail;
};

struct CheckTolerances {
  double power_rule = 1e-3;  // relative sup error
  double semigroup = 5e-3;
  double round_trip = 5e-3;
  double inequality_slack = 1e-6;
  double logistic = 1e-12;
  double conjugate = 1e-9;
  double rate = 1e-3;
  double kernel = 1e-12;
  std::size_t grid_m = 4096;
  std::size_t random_pairs = 1000;
};

/// Quick invariant suite: fractional power rule, semigroup and round trip,
/// density/classification distance inequalities, logistic identity, Gram PSD
/// and fBm/BM equality, conjugate posterior oracles, closed-form rate solver.
std::vector<CheckResult> run_checks(const CheckTolerances& tol, std::uint64_t seed, int threads = 1);

}  // namespace gplab
