#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ppgd/dataset.hpp"
#include "ppgd/init.hpp"
#include "ppgd/ppnet.hpp"
#include "ppgd/rng.hpp"

namespace ppgd {

/// Every knob of the estimator.
struct TrainConfig {
  std::size_t r = 1;          // ridge terms
  std::size_t K = 2;          // breakpoints per ridge term
  double c1 = 1.0;            // penalty constant
  double lambda = 1.0 / 6.0;  // step size
  double rho = 1.0;           // inner-weight scale
  std::size_t steps = 0;      // gradient steps per restart
  std::size_t restarts = 50;  // random initialisations
  double beta = 1.0;          // truncation level
  std::uint64_t seed = 0;

  std::size_t neurons() const { return r * K; }
  /// Throws ConfigError on any violated positivity or range constraint.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Parameter schedule of the convergence theorem for sample size n:
///   beta = c3 ln n,  K = max(2, ceil((n / (ln n)^3)^(1/(2p+1)))),
///   lambda = 1 / (3 K r),  rho = n^2 K,  steps = ceil(K n (ln n)^2).
/// `restarts` is left at the practical default; see theorem_restarts().
TrainConfig theorem_schedule(std::size_t n, double p, std::size_t r, double c3);

/// ceil((ln n)^(-3 r d / (2p+1)) * n^(r d / (2p+1))), the theorem's restart
/// count. Reported only; it is far too large to run.
double theorem_restarts(std::size_t n, double p, std::size_t r, std::size_t dim);

/// How select_hyperparams and the experiment turn (n, r, K) into a config:
/// the theorem schedule with K from the grid and the step count optionally capped.
struct ScheduleOptions {
  double c1 = 1.0;
  double c3 = 1.0;
  std::size_t restarts = 50;
  std::optional<std::size_t> steps;  // fixed step count overriding the schedule
  std::optional<std::size_t> steps_cap;
  std::uint64_t seed = 0;
};

TrainConfig config_for(std::size_t n, std::size_t r, std::size_t K, const ScheduleOptions& opts);

struct CandidateModel {
  NetworkParams params;
  InitPlan plan;
  double penalized_risk = 0.0;
  std::size_t steps_run = 0;
};

struct TrainedModel {
  CandidateModel best;
  double beta = 1.0;
  TrainConfig config;
  /// Final penalized risk of every restart, by restart index.
  std::vector<double> restart_risks;
};

/// One gradient step: (a, b) - lambda * grad F(a, b). Throws TrainingError if
/// the gradient is not finite.
NetworkParams gd_step(const NetworkParams& params, const DataSet& data, double c1, double lambda);

/// Per-step diagnostics handed to a TrainObserver. `risk`, `margin` and
/// `outer_norm_sq` describe the iterate before step t; `max_drift` is
/// max |b^(t+1) - b^(t)| over all inner weights.
struct StepRecord {
  std::size_t t = 0;
  double risk = 0.0;
  double margin = 0.0;
  double outer_norm_sq = 0.0;
  double max_drift = 0.0;
  const NetworkParams* before = nullptr;
  const NetworkParams* after = nullptr;
};
using TrainObserver = std::function<void(const StepRecord&)>;

/// Initialise from `rng` and run config.steps gradient steps.
CandidateModel train_once(const DataSet& data, const TrainConfig& config, Rng& rng,
                          const TrainObserver& observer = {});

/// Gradient descent from given weights; the same loop train_once uses.
NetworkParams run_gradient_descent(NetworkParams params, const DataSet& data, double c1, double lambda,
                                   std::size_t steps, const TrainObserver& observer = {});

/// config.restarts independent runs, restart i seeded with
/// stream_seed(config.seed, i); keeps the lowest penalized risk, lowest index
/// on ties. Restarts run in parallel; the result does not depend on the
/// thread count.
TrainedModel fit(const DataSet& data, const TrainConfig& config);

/// truncate(forward(best, x), beta).
double predict(const TrainedModel& model, std::span<const double> x);

/// Seeded shuffle, then the first ceil(0.8 n) rows learn and the rest test.
struct SampleSplit {
  DataSet learning;
  DataSet testing;
};
SampleSplit split_sample(const DataSet& data, std::uint64_t seed);

struct SelectionResult {
  TrainConfig config;  // schedule for the full sample at the chosen (r, K)
  std::size_t r = 0;
  std::size_t K = 0;
  /// Test risk per grid cell, K-major: cells[iK * |r_grid| + ir].
  std::vector<double> cell_risks;
};

/// Fits every (r, K) on the learning part and keeps the cell with the
/// smallest empirical L2 risk on the testing part; ties go to smaller K,
/// then smaller r. Cell fits use independent seeds derived from opts.seed.
SelectionResult select_hyperparams(const DataSet& data, std::span<const std::size_t> r_grid,
                                   std::span<const std::size_t> K_grid, const ScheduleOptions& opts,
                                   std::uint64_t split_seed);

/// min_{i,k} |b_{k,0} + sum_j b_{k,j} x_i^(j)|; 0 when there are no neurons.
double activation_margin(const NetworkParams& params, const DataSet& data);

/// lambda * 2 * sqrt(risk) * max(1, max_abs_x) * sqrt(outer_norm_sq) * exp(-margin / 2):
/// per-step bound on the movement of any inner weight.
double drift_bound(double risk, double margin, double lambda, double outer_norm_sq, double max_abs_x);

}  // namespace ppgd
