#include "ppgd/ppnet.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "ppgd/errors.hpp"

namespace ppgd {

namespace {

// Below this many (sample, neuron) pairs the kernels stay serial.
constexpr std::size_t kParallelWork = 1 << 14;

void check_dims(const NetworkParams& params, std::size_t dim) {
  if (params.dim != dim) {
    throw std::invalid_argument("dimension mismatch: network expects " + std::to_string(params.dim) +
                                ", input has " + std::to_string(dim));
  }
}

}  // namespace

NetworkParams NetworkParams::zeros(std::size_t neurons, std::size_t dim) {
  NetworkParams p;
  p.dim = dim;
  p.outer.assign(neurons + 1, 0.0);
  p.inner.assign(neurons * (dim + 1), 0.0);
  return p;
}

bool NetworkParams::all_finite() const {
  for (double v : outer)
    if (!std::isfinite(v)) return false;
  for (double v : inner)
    if (!std::isfinite(v)) return false;
  return true;
}

void NetworkParams::validate() const {
  if (outer.empty()) throw ConfigError("network has no outer weights");
  if (inner.size() != neurons() * row_width()) throw ConfigError("network: inner weight matrix has the wrong shape");
  if (!all_finite()) throw ConfigError("network: non-finite weight");
}

double NetworkParams::outer_norm_sq() const {
  double s = 0.0;
  for (double a : outer) s += a * a;
  return s;
}

double pre_activation(const NetworkParams& params, std::size_t k, std::span<const double> x) {
  const auto row = params.neuron(k);
  double z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) z += row[j + 1] * x[j];
  return z + row[0];
}

double forward(const NetworkParams& params, std::span<const double> x) {
  check_dims(params, x.size());
  double f = params.outer[0];
  for (std::size_t k = 0; k < params.neurons(); ++k) {
    f += params.outer[k + 1] * sigmoid(pre_activation(params, k, x));
  }
  return f;
}

std::vector<double> forward_batch(const NetworkParams& params, const DataSet& data) {
  check_dims(params, data.dim);
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::vector<double> out(data.size());
#pragma omp parallel for schedule(static) if (data.size() * params.neurons() >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = forward(params, data.row(i));
  return out;
}

void HiddenState::refresh(const NetworkParams& params, const DataSet& data) {
  check_dims(params, data.dim);
  n_ = data.size();
  m_ = params.neurons();
  z_.resize(n_ * m_);
  s_.resize(n_ * m_);
  ds_.resize(n_ * m_);
  const auto m = static_cast<std::ptrdiff_t>(m_);
#pragma omp parallel for schedule(static) if (n_ * m_ >= kParallelWork)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double z = pre_activation(params, k, data.row(i));
      const double e = std::exp(-std::abs(z));
      const double d = 1.0 + e;
      const std::size_t at = k * n_ + i;
      z_[at] = z;
      s_[at] = z >= 0.0 ? 1.0 / d : e / d;
      ds_[at] = e / (d * d);
    }
  }
}

void HiddenState::residuals(std::span<const double> outer, const DataSet& data, std::span<double> out) const {
  const auto n = static_cast<std::ptrdiff_t>(n_);
#pragma omp parallel for schedule(static) if (n_ * m_ >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double f = outer[0];
    for (std::size_t k = 0; k < m_; ++k) f += outer[k + 1] * s_[k * n_ + i];
    out[i] = f - data.ys[i];
  }
}

void HiddenState::gradient(const NetworkParams& params, const DataSet& data, double c1,
                           std::span<const double> residuals, NetworkParams& grad) const {
  if (grad.dim != params.dim || grad.outer.size() != params.outer.size() || grad.inner.size() != params.inner.size()) {
    grad = NetworkParams::zeros(params.neurons(), params.dim);
  }
  const double two_over_n = 2.0 / static_cast<double>(n_);
  const double ridge = 2.0 * c1 / static_cast<double>(n_);
  const std::size_t d = params.dim;

  double rsum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) rsum += residuals[i];
  grad.outer[0] = two_over_n * rsum + ridge * params.outer[0];

  const auto m = static_cast<std::ptrdiff_t>(m_);
#pragma omp parallel for schedule(static) if (n_ * m_ * (d + 1) >= kParallelWork)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const double* s = s_.data() + k * n_;
    const double* ds = ds_.data() + k * n_;
    const double a = params.outer[k + 1];

    double as = 0.0;
    for (std::size_t i = 0; i < n_; ++i) as += residuals[i] * s[i];
    grad.outer[k + 1] = two_over_n * as + ridge * a;

    double* g = grad.inner.data() + k * (d + 1);
    for (std::size_t j = 0; j <= d; ++j) g[j] = 0.0;
    if (a == 0.0) continue;
    for (std::size_t i = 0; i < n_; ++i) {
      const double coef = residuals[i] * ds[i];
      if (coef == 0.0) continue;
      g[0] += coef;
      const double* x = data.xs.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) g[j + 1] += coef * x[j];
    }
    const double scale = two_over_n * a;
    for (std::size_t j = 0; j <= d; ++j) g[j] *= scale;
  }
}

double HiddenState::margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (double z : z_) m = std::min(m, std::abs(z));
  return z_.empty() ? 0.0 : m;
}

RiskBreakdown risk_from_residuals(std::span<const double> residuals, std::span<const double> outer, double c1) {
  const auto n = static_cast<double>(residuals.size());
  double sq = 0.0;
  for (double r : residuals) sq += r * r;
  double norm = 0.0;
  for (double a : outer) norm += a * a;
  RiskBreakdown out;
  out.empirical = sq / n;
  out.penalty = c1 / n * norm;
  out.total = out.empirical + out.penalty;
  return out;
}

RiskBreakdown penalized_risk(const NetworkParams& params, const DataSet& data, double c1) {
  if (data.size() == 0) throw std::invalid_argument("penalized_risk: empty data set");
  check_dims(params, data.dim);
  HiddenState state(params, data);
  std::vector<double> r(data.size());
  state.residuals(params.outer, data, r);
  return risk_from_residuals(r, params.outer, c1);
}

NetworkParams gradient(const NetworkParams& params, const DataSet& data, double c1) {
  if (data.size() == 0) throw std::invalid_argument("gradient: empty data set");
  HiddenState state(params, data);
  std::vector<double> r(data.size());
  state.residuals(params.outer, data, r);
  NetworkParams g = NetworkParams::zeros(params.neurons(), params.dim);
  state.gradient(params, data, c1, r, g);
  return g;
}

}  // namespace ppgd
