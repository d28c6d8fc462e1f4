#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ppgd/dataset.hpp"

namespace ppgd {

/// Weights of a one-hidden-layer sigmoid network with M neurons on R^d:
///
///   f(x) = a_0 + sum_{k=1..M} a_k * sigma(b_{k,0} + sum_j b_{k,j} x^(j))
///
/// `outer` holds a_0..a_M. `inner` holds one row of d+1 entries per neuron,
/// bias first: row k-1 = (b_{k,0}, b_{k,1}, ..., b_{k,d}). Neurons are
/// addressed 0-based in code.
struct NetworkParams {
  std::size_t dim = 0;
  std::vector<double> outer;
  std::vector<double> inner;

  static NetworkParams zeros(std::size_t neurons, std::size_t dim);

  std::size_t neurons() const { return outer.empty() ? 0 : outer.size() - 1; }
  std::size_t row_width() const { return dim + 1; }

  std::span<const double> neuron(std::size_t k) const { return {inner.data() + k * row_width(), row_width()}; }
  std::span<double> neuron(std::size_t k) { return {inner.data() + k * row_width(), row_width()}; }

  double bias(std::size_t k) const { return inner[k * row_width()]; }
  double weight(std::size_t k, std::size_t j) const { return inner[k * row_width() + j]; }

  bool all_finite() const;
  /// Throws ConfigError if the shape invariants are broken.
  void validate() const;
  /// Sum of squares of a_0..a_M.
  double outer_norm_sq() const;

  bool operator==(const NetworkParams&) const = default;
};

/// Logistic squasher 1 / (1 + e^-z), evaluated without overflow for any
/// finite z by branching on the sign of z.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// sigma'(z) = sigma(z) (1 - sigma(z)), written as e / (1 + e)^2 with
/// e = exp(-|z|) so the tail keeps its relative accuracy.
inline double sigmoid_derivative(double z) {
  const double e = std::exp(-std::abs(z));
  const double d = 1.0 + e;
  return e / (d * d);
}

/// Clamp to [-beta, beta].
inline double truncate(double v, double beta) { return std::max(std::min(v, beta), -beta); }

/// b_{k,0} + sum_j b_{k,j} x^(j).
double pre_activation(const NetworkParams& params, std::size_t k, std::span<const double> x);

double forward(const NetworkParams& params, std::span<const double> x);

/// f(x_i) for every row of `data`.
std::vector<double> forward_batch(const NetworkParams& params, const DataSet& data);

struct RiskBreakdown {
  double empirical = 0.0;  // (1/n) sum (f(x_i) - y_i)^2
  double penalty = 0.0;    // (c1/n) sum_{k=0..M} a_k^2
  double total = 0.0;      // empirical + penalty
};

RiskBreakdown penalized_risk(const NetworkParams& params, const DataSet& data, double c1);

/// Exact gradient of the penalized risk, laid out like NetworkParams.
NetworkParams gradient(const NetworkParams& params, const DataSet& data, double c1);

/// Hidden-layer values on a fixed sample, stored neuron-major (entry k * n + i).
///
/// Gradient descent reuses one HiddenState across steps and only refreshes
/// it when an inner weight actually changes, which in the saturated regime
/// is almost never.
class HiddenState {
 public:
  HiddenState() = default;
  HiddenState(const NetworkParams& params, const DataSet& data) { refresh(params, data); }

  void refresh(const NetworkParams& params, const DataSet& data);

  std::size_t samples() const { return n_; }
  std::size_t neurons() const { return m_; }

  std::span<const double> pre(std::size_t k) const { return {z_.data() + k * n_, n_}; }
  std::span<const double> act(std::size_t k) const { return {s_.data() + k * n_, n_}; }
  std::span<const double> slope(std::size_t k) const { return {ds_.data() + k * n_, n_}; }

  /// r_i = f(x_i) - y_i under the current outer weights.
  void residuals(std::span<const double> outer, const DataSet& data, std::span<double> out) const;

  /// Gradient of the penalized risk given residuals from residuals().
  void gradient(const NetworkParams& params, const DataSet& data, double c1, std::span<const double> residuals,
                NetworkParams& grad) const;

  /// min_{i,k} |pre-activation|.
  double margin() const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> z_;
  std::vector<double> s_;
  std::vector<double> ds_;
};

/// Risk from precomputed residuals; summation order matches penalized_risk.
RiskBreakdown risk_from_residuals(std::span<const double> residuals, std::span<const double> outer, double c1);

}  // namespace ppgd
