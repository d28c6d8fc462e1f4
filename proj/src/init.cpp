#include "ppgd/init.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ppgd/errors.hpp"

namespace ppgd {

namespace {

// Extra relative clearance demanded of a candidate midpoint, so the
// guarantee survives the rounding of rho * (c^T x - b) inside the network.
constexpr double kClearanceSlack = 1e-9;

}  // namespace

std::vector<double> sample_direction(std::size_t dim, Rng& rng) {
  if (dim == 0) throw ConfigError("direction dimension must be at least 1");
  std::vector<double> c(dim);
  for (;;) {
    double sq = 0.0;
    for (double& v : c) {
      v = rng.uniform(-1.0, 1.0);
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-9) continue;
    for (double& v : c) v /= norm;
    return c;
  }
}

double breakpoint_clearance(std::size_t n, std::size_t K, double a_bound, std::size_t dim) {
  return std::sqrt(static_cast<double>(dim)) * a_bound /
         (static_cast<double>(n + 1) * static_cast<double>(K - 1));
}

std::vector<double> choose_breakpoints(std::span<const double> projections, std::size_t K, double a_bound,
                                       std::size_t dim) {
  if (K < 2) throw ConfigError("K must be at least 2, got " + std::to_string(K));
  const std::size_t n = projections.size();
  const double s = std::sqrt(static_cast<double>(dim)) * a_bound;
  const double width = 2.0 * s / static_cast<double>(K - 1);
  const double sub = width / static_cast<double>(n + 1);
  const double clearance = breakpoint_clearance(n, K, a_bound, dim);
  const double demanded = clearance * (1.0 + kClearanceSlack);

  std::vector<double> sorted(projections.begin(), projections.end());
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty() && (sorted.front() < -s * (1.0 + 1e-12) || sorted.back() > s * (1.0 + 1e-12))) {
    throw std::invalid_argument("choose_breakpoints: projection outside [-sqrt(d) A, sqrt(d) A]");
  }

  std::vector<double> b(K);
  b[0] = -s - 2.0 * s / (static_cast<double>(n + 1) * static_cast<double>(K - 1));

  for (std::size_t k = 2; k <= K; ++k) {
    const double lo = -s + static_cast<double>(k - 2) * width;
    std::size_t first_empty = n + 1;
    std::size_t chosen = n + 1;
    for (std::size_t m = 0; m <= n; ++m) {
      const double left = lo + static_cast<double>(m) * sub;
      const double right = lo + static_cast<double>(m + 1) * sub;
      const double mid = lo + (static_cast<double>(m) + 0.5) * sub;
      auto it = std::lower_bound(sorted.begin(), sorted.end(), left);
      if (it != sorted.end() && *it <= right) continue;  // closed piece is occupied
      if (first_empty > n) first_empty = m;
      const bool above_ok = it == sorted.end() || *it - mid >= demanded;
      const bool below_ok = it == sorted.begin() || mid - *(it - 1) >= demanded;
      if (above_ok && below_ok) {
        chosen = m;
        break;
      }
    }
    if (chosen > n) chosen = first_empty;
    if (chosen > n) throw std::logic_error("choose_breakpoints: no empty subinterval");
    b[k - 1] = lo + (static_cast<double>(chosen) + 0.5) * sub;
  }
  return b;
}

std::vector<double> project(const DataSet& data, std::span<const double> direction) {
  if (direction.size() != data.dim) throw std::invalid_argument("project: dimension mismatch");
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    double u = 0.0;
    for (std::size_t j = 0; j < data.dim; ++j) u += direction[j] * x[j];
    out[i] = u;
  }
  return out;
}

InitPlan make_init_plan(const DataSet& data, std::size_t r, std::size_t K, double rho, Rng& rng) {
  if (r == 0) throw ConfigError("r must be at least 1");
  InitPlan plan;
  plan.rho = rho;
  plan.directions.reserve(r);
  plan.breakpoints.reserve(r);
  for (std::size_t s = 0; s < r; ++s) {
    plan.directions.push_back(sample_direction(data.dim, rng));
    const auto u = project(data, plan.directions.back());
    plan.breakpoints.push_back(choose_breakpoints(u, K, data.a_bound, data.dim));
  }
  return plan;
}

NetworkParams build_initial_params(const InitPlan& plan, std::size_t r, std::size_t K, std::size_t dim) {
  if (plan.directions.size() != r || plan.breakpoints.size() != r) {
    throw std::invalid_argument("build_initial_params: plan has the wrong number of directions");
  }
  NetworkParams p = NetworkParams::zeros(r * K, dim);
  for (std::size_t s = 0; s < r; ++s) {
    const auto& c = plan.directions[s];
    const auto& b = plan.breakpoints[s];
    if (c.size() != dim || b.size() != K) throw std::invalid_argument("build_initial_params: plan shape mismatch");
    for (std::size_t k = 0; k < K; ++k) {
      auto row = p.neuron(s * K + k);
      row[0] = -plan.rho * b[k];
      for (std::size_t j = 0; j < dim; ++j) row[j + 1] = plan.rho * c[j];
    }
  }
  return p;
}

}  // namespace ppgd
