#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppgd/dataset.hpp"
#include "ppgd/ppnet.hpp"
#include "ppgd/rng.hpp"

namespace ppgd {

/// Structured starting point of one gradient-descent run: one random unit
/// direction per ridge term, K breakpoints per direction, and the scale rho.
struct InitPlan {
  std::vector<std::vector<double>> directions;   // r unit vectors in [-1,1]^d
  std::vector<std::vector<double>> breakpoints;  // r increasing sequences of length K
  double rho = 1.0;

  bool operator==(const InitPlan&) const = default;
};

/// Uniform draw on [-1,1]^d, redrawn while its norm is below 1e-9, then
/// normalised. For d = 1 this is +1 or -1.
std::vector<double> sample_direction(std::size_t dim, Rng& rng);

/// Breakpoints b_1 < ... < b_K for one direction.
///
/// With s = sqrt(d) * A, w = 2s / (K - 1) and n = projections.size():
///   b_1 = -s - w / (n + 1)
///   b_k = midpoint of the lowest-index subinterval of
///         [-s + (k-2) w, -s + (k-1) w], cut into n + 1 equal closed pieces,
///         that contains no projection (k = 2..K).
/// Every projection then lies at least s / ((n + 1)(K - 1)) away from every
/// breakpoint. Throws ConfigError for K < 2 and std::invalid_argument when a
/// projection lies outside [-s, s].
std::vector<double> choose_breakpoints(std::span<const double> projections, std::size_t K, double a_bound,
                                       std::size_t dim);

/// s / ((n + 1)(K - 1)): guaranteed distance between projections and breakpoints.
double breakpoint_clearance(std::size_t n, std::size_t K, double a_bound, std::size_t dim);

/// c^T x_i for every row.
std::vector<double> project(const DataSet& data, std::span<const double> direction);

/// Draws r directions from `rng` and places breakpoints against `data`.
InitPlan make_init_plan(const DataSet& data, std::size_t r, std::size_t K, double rho, Rng& rng);

/// Neuron (s-1)K + k gets b_{.,j} = rho * c_s^(j) and b_{.,0} = -rho * b_k;
/// every outer weight is zero.
NetworkParams build_initial_params(const InitPlan& plan, std::size_t r, std::size_t K, std::size_t dim);

}  // namespace ppgd
