#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ppgd {

/// Outcome of one numerical certification suite. `certificate` is the
/// machine-readable record printed by `ppgd verify`.
struct SuiteResult {
  std::string name;
  bool passed = false;
  nlohmann::json certificate;
};

/// Descent, contraction, Lipschitz and PL inequalities of penalized linear
/// least squares on `problems` random instances (K <= 20, n <= 50).
SuiteResult verify_linear_gd(std::uint64_t seed, std::size_t problems = 100);

/// |sigma(x) - 1{x >= 0}| <= exp(-|x|) on x in [-50, 50] with step 1e-3.
SuiteResult verify_sigmoid_indicator();

/// One row of the step-approximation sweep.
struct ApproxRow {
  std::string function;
  std::size_t K = 0;
  double rho = 0.0;
  double empirical_sup = 0.0;
  double bound = 0.0;
};

/// Sup error of the sigmoid step approximant against its analytic bound for
/// g in {sin, |u|^(1/2), u}, K in {5, 20, 80}, rho in {1e2, 1e4, 1e8}.
SuiteResult verify_approx(std::uint64_t seed, std::size_t grid_points = 100000,
                          std::vector<ApproxRow>* rows = nullptr);
std::string approx_rows_csv(const std::vector<ApproxRow>& rows);

/// Breakpoint inequalities, projection clearance and initial activation
/// margin on `datasets` random data sets (n <= 200, d <= 6).
SuiteResult verify_init(std::uint64_t seed, std::size_t datasets = 1000);

/// Inner-weight freeze on an m1 sample (n = 100, r = 1, K = 5) under the
/// theorem schedule: every step's drift within drift_bound, total drift at
/// most 1e-8, and the per-step decrease with L = 1 / lambda.
SuiteResult verify_drift(std::uint64_t seed);

/// Outer-weight trajectory of the network against linear gradient descent on
/// the frozen design [1, sigma(z_ik)] over 100 steps, per coordinate within 1e-10.
SuiteResult verify_linear_regime(std::uint64_t seed);

/// All suites in a fixed order.
std::vector<SuiteResult> verify_all(std::uint64_t seed);

}  // namespace ppgd
