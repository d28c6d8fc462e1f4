#include "ppgd/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ppgd/errors.hpp"

namespace ppgd {

void TrainConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (r < 1) throw ConfigError("r must be at least 1");
  if (K < 2) throw ConfigError("K must be at least 2");
  if (!positive(c1)) throw ConfigError("c1 must be positive and finite");
  if (!positive(lambda)) throw ConfigError("lambda must be positive and finite");
  if (!positive(rho)) throw ConfigError("rho must be positive and finite");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!positive(beta)) throw ConfigError("beta must be positive and finite");
}

TrainConfig theorem_schedule(std::size_t n, double p, std::size_t r, double c3) {
  if (n < 2) throw ConfigError("theorem schedule needs n >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("smoothness p must lie in (0, 1]");
  if (r < 1) throw ConfigError("r must be at least 1");
  if (!(c3 > 0.0)) throw ConfigError("c3 must be positive");
  const auto nd = static_cast<double>(n);
  const double ln = std::log(nd);
  TrainConfig cfg;
  cfg.r = r;
  cfg.K = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(std::pow(nd / (ln * ln * ln), 1.0 / (2.0 * p + 1.0)))));
  cfg.lambda = 1.0 / (3.0 * static_cast<double>(cfg.K) * static_cast<double>(r));
  cfg.rho = nd * nd * static_cast<double>(cfg.K);
  cfg.steps = static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.K) * nd * ln * ln));
  cfg.beta = c3 * ln;
  return cfg;
}

double theorem_restarts(std::size_t n, double p, std::size_t r, std::size_t dim) {
  const auto nd = static_cast<double>(n);
  const double e = static_cast<double>(r * dim) / (2.0 * p + 1.0);
  return std::ceil(std::pow(std::log(nd), -3.0 * e) * std::pow(nd, e));
}

TrainConfig config_for(std::size_t n, std::size_t r, std::size_t K, const ScheduleOptions& opts) {
  if (K < 2) throw ConfigError("K must be at least 2");
  TrainConfig cfg = theorem_schedule(n, 1.0, r, opts.c3);
  const auto nd = static_cast<double>(n);
  const double ln = std::log(nd);
  cfg.K = K;
  cfg.lambda = 1.0 / (3.0 * static_cast<double>(K) * static_cast<double>(r));
  cfg.rho = nd * nd * static_cast<double>(K);
  cfg.steps = opts.steps ? *opts.steps : static_cast<std::size_t>(std::ceil(static_cast<double>(K) * nd * ln * ln));
  if (opts.steps_cap) cfg.steps = std::min(cfg.steps, *opts.steps_cap);
  cfg.c1 = opts.c1;
  cfg.restarts = opts.restarts;
  cfg.seed = opts.seed;
  cfg.validate();
  return cfg;
}

namespace {

void require_finite(const NetworkParams& g) {
  if (!g.all_finite()) throw TrainingError("non-finite gradient during gradient descent");
}

// next = params - lambda * grad; reports whether any inner weight moved.
bool apply_step(const NetworkParams& params, const NetworkParams& grad, double lambda, NetworkParams& next,
                double* max_drift) {
  next.dim = params.dim;
  next.outer.resize(params.outer.size());
  next.inner.resize(params.inner.size());
  for (std::size_t k = 0; k < params.outer.size(); ++k) next.outer[k] = params.outer[k] - lambda * grad.outer[k];
  bool moved = false;
  double drift = 0.0;
  for (std::size_t q = 0; q < params.inner.size(); ++q) {
    const double v = params.inner[q] - lambda * grad.inner[q];
    next.inner[q] = v;
    if (v != params.inner[q]) {
      moved = true;
      drift = std::max(drift, std::abs(v - params.inner[q]));
    }
  }
  if (max_drift) *max_drift = drift;
  return moved;
}

}  // namespace

NetworkParams gd_step(const NetworkParams& params, const DataSet& data, double c1, double lambda) {
  const NetworkParams g = gradient(params, data, c1);
  require_finite(g);
  NetworkParams next;
  apply_step(params, g, lambda, next, nullptr);
  return next;
}

NetworkParams run_gradient_descent(NetworkParams params, const DataSet& data, double c1, double lambda,
                                   std::size_t steps, const TrainObserver& observer) {
  HiddenState state(params, data);
  std::vector<double> r(data.size());
  NetworkParams grad = NetworkParams::zeros(params.neurons(), params.dim);
  NetworkParams next = params;
  for (std::size_t t = 0; t < steps; ++t) {
    state.residuals(params.outer, data, r);
    state.gradient(params, data, c1, r, grad);
    require_finite(grad);
    double drift = 0.0;
    const bool moved = apply_step(params, grad, lambda, next, &drift);
    if (!next.all_finite()) throw TrainingError("non-finite weights after step " + std::to_string(t));
    if (observer) {
      StepRecord rec;
      rec.t = t;
      rec.risk = risk_from_residuals(r, params.outer, c1).total;
      rec.margin = state.margin();
      rec.outer_norm_sq = params.outer_norm_sq();
      rec.max_drift = drift;
      rec.before = &params;
      rec.after = &next;
      observer(rec);
    }
    std::swap(params, next);
    if (moved) state.refresh(params, data);
  }
  return params;
}

CandidateModel train_once(const DataSet& data, const TrainConfig& config, Rng& rng, const TrainObserver& observer) {
  data.validate();
  config.validate();
  CandidateModel out;
  out.plan = make_init_plan(data, config.r, config.K, config.rho, rng);
  NetworkParams start = build_initial_params(out.plan, config.r, config.K, data.dim);
  out.params = run_gradient_descent(std::move(start), data, config.c1, config.lambda, config.steps, observer);
  out.steps_run = config.steps;
  out.penalized_risk = penalized_risk(out.params, data, config.c1).total;
  return out;
}

TrainedModel fit(const DataSet& data, const TrainConfig& config) {
  data.validate();
  config.validate();
  const auto restarts = static_cast<std::ptrdiff_t>(config.restarts);
  std::vector<CandidateModel> candidates(config.restarts);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < restarts; ++i) {
    try {
      Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(i)));
      candidates[i] = train_once(data, config, rng);
    } catch (...) {
#pragma omp critical(ppgd_fit_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  TrainedModel model;
  model.config = config;
  model.beta = config.beta;
  model.restart_risks.reserve(candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    model.restart_risks.push_back(candidates[i].penalized_risk);
    if (candidates[i].penalized_risk < candidates[best].penalized_risk) best = i;
  }
  model.best = std::move(candidates[best]);
  return model;
}

double predict(const TrainedModel& model, std::span<const double> x) {
  return truncate(forward(model.best.params, x), model.beta);
}

SampleSplit split_sample(const DataSet& data, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 5) throw ConfigError("sample splitting needs at least 5 observations");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.index(i + 1)]);
  const std::size_t n_learn = (8 * n + 9) / 10;
  SampleSplit out;
  out.learning = data.subset(std::span(idx).first(n_learn));
  out.testing = data.subset(std::span(idx).subspan(n_learn));
  return out;
}

SelectionResult select_hyperparams(const DataSet& data, std::span<const std::size_t> r_grid,
                                   std::span<const std::size_t> K_grid, const ScheduleOptions& opts,
                                   std::uint64_t split_seed) {
  if (r_grid.empty() || K_grid.empty()) throw ConfigError("hyperparameter grids must be nonempty");
  std::vector<std::size_t> rs(r_grid.begin(), r_grid.end());
  std::vector<std::size_t> Ks(K_grid.begin(), K_grid.end());
  std::sort(rs.begin(), rs.end());
  std::sort(Ks.begin(), Ks.end());

  const SampleSplit split = split_sample(data, split_seed);
  SelectionResult out;
  out.cell_risks.reserve(rs.size() * Ks.size());
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t cell = 0;
  for (std::size_t K : Ks) {
    for (std::size_t r : rs) {
      ScheduleOptions cell_opts = opts;
      cell_opts.seed = stream_seed(opts.seed, ++cell);
      const TrainedModel model = fit(split.learning, config_for(split.learning.size(), r, K, cell_opts));
      double sq = 0.0;
      for (std::size_t i = 0; i < split.testing.size(); ++i) {
        const double e = predict(model, split.testing.row(i)) - split.testing.ys[i];
        sq += e * e;
      }
      const double risk = sq / static_cast<double>(split.testing.size());
      out.cell_risks.push_back(risk);
      if (risk < best || out.r == 0) {
        best = risk;
        out.r = r;
        out.K = K;
      }
    }
  }
  out.config = config_for(data.size(), out.r, out.K, opts);
  return out;
}

double activation_margin(const NetworkParams& params, const DataSet& data) {
  if (params.dim != data.dim) throw std::invalid_argument("activation_margin: dimension mismatch");
  if (params.neurons() == 0 || data.size() == 0) return 0.0;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < params.neurons(); ++k) m = std::min(m, std::abs(pre_activation(params, k, data.row(i))));
  }
  return m;
}

double drift_bound(double risk, double margin, double lambda, double outer_norm_sq, double max_abs_x) {
  return lambda * 2.0 * std::sqrt(risk) * std::max(1.0, max_abs_x) * std::sqrt(outer_norm_sq) *
         std::exp(-margin / 2.0);
}

}  // namespace ppgd
