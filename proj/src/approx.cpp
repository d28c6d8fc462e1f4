#include "ppgd/approx.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "ppgd/errors.hpp"
#include "ppgd/ppnet.hpp"

namespace ppgd {

double StepApproximant::operator()(double u) const {
  if (std::isinf(rho)) return step(u);
  double v = a0;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) v += coefficients[k] * sigmoid(rho * (u - breakpoints[k]));
  return v;
}

double StepApproximant::step(double u) const {
  double v = a0;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (u >= breakpoints[k]) v += coefficients[k];
  }
  return v;
}

double sigmoid_indicator_gap(double c, double b, double x) {
  if (!(c > 0.0)) throw std::invalid_argument("sigmoid_indicator_gap: c must be positive");
  // 1 - sigma(t) is evaluated as sigma(-t) to avoid cancellation.
  const double t = c * (x - b);
  return x >= b ? sigmoid(-t) : sigmoid(t);
}

StepApproximant build_step_approximant(const RidgeTarget& target, std::span<const double> breakpoints, double rho) {
  if (breakpoints.empty()) throw std::invalid_argument("build_step_approximant: no breakpoints");
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw std::invalid_argument("build_step_approximant: breakpoints must be strictly increasing");
    }
  }
  StepApproximant out;
  out.rho = rho;
  out.breakpoints.assign(breakpoints.begin(), breakpoints.end());
  out.coefficients.assign(breakpoints.size(), 0.0);
  out.a0 = target.g(breakpoints[0]);
  double prev = out.a0;
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    const double cur = target.g(breakpoints[k]);
    out.coefficients[k] = cur - prev;
    prev = cur;
  }
  return out;
}

double approx_error_bound(double p, double C, std::size_t K, double a_bound, std::size_t dim, double rho,
                          std::size_t n) {
  if (K < 2) throw ConfigError("approx_error_bound: K must be at least 2");
  const double s = a_bound * std::sqrt(static_cast<double>(dim));
  const double km1 = static_cast<double>(K - 1);
  const double scale = C * std::pow(4.0 * s, p);
  const double tail = std::exp(-rho * s / (static_cast<double>(n + 1) * km1));
  return 3.0 * scale / std::pow(km1, p) + scale * std::pow(km1, 1.0 - p) * tail;
}

void halton_point(std::size_t index, std::span<double> out) {
  static constexpr std::array<unsigned, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (out.size() > primes.size()) throw std::invalid_argument("halton_point: dimension above 16");
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double base = primes[j];
    double f = 1.0;
    double v = 0.0;
    for (std::size_t i = index; i > 0; i /= primes[j]) {
      f /= base;
      v += f * static_cast<double>(i % primes[j]);
    }
    out[j] = v;
  }
}

double empirical_sup_error(const StepApproximant& approx, const RidgeTarget& target, double a_bound,
                           std::size_t points) {
  const std::size_t d = target.direction.size();
  if (d == 0 || points < 2) throw std::invalid_argument("empirical_sup_error: need a direction and >= 2 points");
  const auto count = static_cast<std::ptrdiff_t>(points);
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::ptrdiff_t q = 0; q < count; ++q) {
    double u = 0.0;
    if (d == 1) {
      const double x = -a_bound + 2.0 * a_bound * static_cast<double>(q) / static_cast<double>(points - 1);
      u = target.direction[0] * x;
    } else {
      std::array<double, 16> h{};
      halton_point(static_cast<std::size_t>(q) + 1, std::span(h.data(), d));
      for (std::size_t j = 0; j < d; ++j) u += target.direction[j] * (-a_bound + 2.0 * a_bound * h[j]);
    }
    worst = std::max(worst, std::abs(approx(u) - target.g(u)));
  }
  return worst;
}

}  // namespace ppgd
