#pragma once

// Independent long-double evaluation of the penalized risk and its central
// finite-difference gradient. Shares nothing with the library kernels.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppgd/dataset.hpp"
#include "ppgd/ppnet.hpp"

namespace testutil {

inline long double risk_ld(const std::vector<long double>& outer, const std::vector<long double>& inner,
                           const ppgd::DataSet& data, long double c1) {
  const std::size_t d = data.dim;
  const std::size_t M = outer.size() - 1;
  const long double n = static_cast<long double>(data.size());
  long double sq = 0.0L;
  for (std::size_t i = 0; i < data.size(); ++i) {
    long double f = outer[0];
    for (std::size_t k = 0; k < M; ++k) {
      long double z = inner[k * (d + 1)];
      for (std::size_t j = 0; j < d; ++j) z += inner[k * (d + 1) + 1 + j] * data.xs[i * d + j];
      f += outer[k + 1] / (1.0L + std::exp(-z));
    }
    const long double r = f - data.ys[i];
    sq += r * r;
  }
  long double pen = 0.0L;
  for (long double a : outer) pen += a * a;
  return sq / n + c1 / n * pen;
}

/// Central differences with h = 1e-6 * max(1, |w|), in the same layout as NetworkParams.
inline ppgd::NetworkParams fd_gradient(const ppgd::NetworkParams& p, const ppgd::DataSet& data, double c1) {
  std::vector<long double> outer(p.outer.begin(), p.outer.end());
  std::vector<long double> inner(p.inner.begin(), p.inner.end());
  ppgd::NetworkParams g = p;
  auto diff = [&](std::vector<long double>& v, std::size_t q) {
    const long double w = v[q];
    const long double h = 1e-6L * std::max(1.0L, std::abs(w));
    v[q] = w + h;
    const long double up = risk_ld(outer, inner, data, c1);
    v[q] = w - h;
    const long double down = risk_ld(outer, inner, data, c1);
    v[q] = w;
    return static_cast<double>((up - down) / (2.0L * h));
  };
  for (std::size_t q = 0; q < outer.size(); ++q) g.outer[q] = diff(outer, q);
  for (std::size_t q = 0; q < inner.size(); ++q) g.inner[q] = diff(inner, q);
  return g;
}

/// |g - fd| / max(|g|, |fd|), and 0 when both vanish.
inline double fd_error(double g, double fd) {
  const double scale = std::max(std::abs(g), std::abs(fd));
  return scale == 0.0 ? 0.0 : std::abs(g - fd) / scale;
}

}  // namespace testutil
