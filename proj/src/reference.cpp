#include "ppgd/reference.hpp"

namespace ppgd::reference {

namespace {

double neuron_input(const NetworkParams& p, std::size_t k, std::span<const double> x) {
  double z = p.bias(k);
  for (std::size_t j = 1; j <= p.dim; ++j) z += p.weight(k, j) * x[j - 1];
  return z;
}

}  // namespace

double forward(const NetworkParams& params, std::span<const double> x) {
  double f = params.outer[0];
  for (std::size_t k = 0; k < params.neurons(); ++k) f += params.outer[k + 1] * sigmoid(neuron_input(params, k, x));
  return f;
}

RiskBreakdown penalized_risk(const NetworkParams& params, const DataSet& data, double c1) {
  const auto n = static_cast<double>(data.size());
  RiskBreakdown out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = reference::forward(params, data.row(i)) - data.ys[i];
    out.empirical += r * r;
  }
  out.empirical /= n;
  for (double a : params.outer) out.penalty += a * a;
  out.penalty *= c1 / n;
  out.total = out.empirical + out.penalty;
  return out;
}

NetworkParams gradient(const NetworkParams& params, const DataSet& data, double c1) {
  const auto n = static_cast<double>(data.size());
  NetworkParams g = NetworkParams::zeros(params.neurons(), params.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const double r = reference::forward(params, x) - data.ys[i];
    g.outer[0] += 2.0 / n * r;
    for (std::size_t k = 0; k < params.neurons(); ++k) {
      const double s = sigmoid(neuron_input(params, k, x));
      const double ds = s * (1.0 - s);
      g.outer[k + 1] += 2.0 / n * r * s;
      auto row = g.neuron(k);
      row[0] += 2.0 / n * r * params.outer[k + 1] * ds;
      for (std::size_t j = 1; j <= params.dim; ++j) row[j] += 2.0 / n * r * params.outer[k + 1] * ds * x[j - 1];
    }
  }
  for (std::size_t k = 0; k < params.outer.size(); ++k) g.outer[k] += 2.0 * c1 / n * params.outer[k];
  return g;
}

}  // namespace ppgd::reference
