#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppgd/dataset.hpp"

namespace ppgd {

enum class Estimator { Neural, Neighbor, Constant };

std::string to_string(Estimator e);
std::string to_string(ModelId m);
ModelId parse_model(const std::string& s);

/// One cell of the simulation study plus every knob of the estimators in it.
struct ExperimentSpec {
  ModelId model = ModelId::M1;
  double noise = 0.05;
  std::size_t n = 100;
  std::size_t repetitions = 25;
  std::size_t test_size = 10000;
  std::vector<Estimator> roster{Estimator::Neural, Estimator::Neighbor, Estimator::Constant};
  std::vector<std::size_t> r_grid{1, 2};
  std::vector<std::size_t> K_grid{5, 10, 20};
  std::vector<std::size_t> knn_grid{1, 2, 4, 8, 16, 32};
  std::size_t restarts = 50;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> steps_cap;
  double c1 = 1.0;
  double c3 = 1.0;
  std::size_t avg_realizations = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ResultRow {
  ModelId model = ModelId::M1;
  double noise = 0.0;
  std::size_t n = 0;
  Estimator estimator = Estimator::Neural;
  double median_scaled_error = 0.0;
  double iqr = 0.0;
  std::size_t repetitions = 0;  // successful repetitions the statistics cover
  std::size_t failures = 0;
  double avg_reference = 0.0;
  std::vector<double> scaled_errors;  // by repetition; NaN marks a failure
  std::vector<std::string> failure_messages;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

using PointFn = std::function<double(std::span<const double>)>;

/// (1/N) sum_i (predict(x_i) - reference(x_i))^2 over row-major test points.
double empirical_l2(const PointFn& predict, std::span<const double> test_xs, std::size_t dim, const PointFn& reference);

/// Median over `realizations` fresh n-samples of the empirical L2 error of
/// their sample mean, against `target` on the given test points.
double avg_reference(const PointFn& target, double noise_sd, std::size_t n, std::span<const double> test_xs,
                     std::size_t realizations, std::uint64_t seed);

/// The scaling denominator for a spec: its target, noise, n and test set.
double avg_reference(const ExperimentSpec& spec);

/// Fixed test design of a spec (uniform on [-1,1]^4, dedicated seed).
std::vector<double> experiment_test_set(const ExperimentSpec& spec);

using ProgressFn = std::function<void(const std::string&)>;

/// Repeats sampling, fitting and scoring; one row per roster entry. A failing
/// fit is recorded in its row and the run continues.
ResultTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

/// model,noise,n,estimator,median_scaled_error,iqr,repetitions,avg_reference
std::string to_csv(const ResultTable& table);
std::string to_json(const ResultTable& table, const ExperimentSpec& spec);

}  // namespace ppgd
