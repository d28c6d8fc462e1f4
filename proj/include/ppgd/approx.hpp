#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ppgd {

/// A (p, C)-smooth univariate g composed with a unit direction:
/// x -> g(direction^T x), with |g(u) - g(v)| <= C |u - v|^p.
struct RidgeTarget {
  std::function<double(double)> g;
  double p = 1.0;
  double C = 1.0;
  std::vector<double> direction;
};

/// u -> a0 + sum_k a_k * sigma(rho (u - b_k)), the sigmoid network that
/// tracks the step function with jumps a_k at the breakpoints b_k.
struct StepApproximant {
  double a0 = 0.0;
  std::vector<double> coefficients;  // a_1..a_K, a_1 = 0
  std::vector<double> breakpoints;   // b_1 < ... < b_K
  double rho = 1.0;

  /// Network value at u. rho = +inf evaluates the step function itself.
  double operator()(double u) const;
  /// a0 + sum_k a_k 1{u >= b_k}.
  double step(double u) const;
};

/// |sigma(c (x - b)) - 1{x >= b}|, which never exceeds exp(-c |x - b|).
double sigmoid_indicator_gap(double c, double b, double x);

/// a0 = g(b_1), a_1 = 0 and a_k = g(b_k) - g(b_{k-1}) for k >= 2, so that
/// a0 + sum_{k <= j} a_k = g(b_j). Throws std::invalid_argument unless the
/// breakpoints are strictly increasing.
StepApproximant build_step_approximant(const RidgeTarget& target, std::span<const double> breakpoints, double rho);

/// Uniform error bound for the approximant on [-A, A]^d:
///   3 C (4 A sqrt(d))^p / (K-1)^p
///     + C (4 A sqrt(d))^p (K-1)^(1-p) exp(-rho sqrt(d) A / ((n+1)(K-1))).
/// rho = +inf is the pure-step limit. Requires K >= 2.
double approx_error_bound(double p, double C, std::size_t K, double a_bound, std::size_t dim, double rho,
                          std::size_t n);

/// Point `index` of the Halton sequence in [0,1)^dim (prime bases 2, 3, 5, ...).
void halton_point(std::size_t index, std::span<double> out);

/// max over `points` Halton points x in [-A, A]^d of
/// |approx(direction^T x) - g(direction^T x)|. For d = 1 the points are an
/// evenly spaced grid including both endpoints.
double empirical_sup_error(const StepApproximant& approx, const RidgeTarget& target, double a_bound,
                           std::size_t points);

}  // namespace ppgd
