#include "ppgd/experiment.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ppgd/baselines.hpp"
#include "ppgd/errors.hpp"
#include "ppgd/format.hpp"
#include "ppgd/rng.hpp"
#include "ppgd/stats.hpp"
#include "ppgd/train.hpp"

namespace ppgd {

namespace {

// Stream tags under the base seed.
constexpr std::uint64_t kTestStream = 1;
constexpr std::uint64_t kAvgStream = 2;
constexpr std::uint64_t kRepStream = 3;

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Neural: return "neural";
    case Estimator::Neighbor: return "neighbor";
    case Estimator::Constant: return "constant";
  }
  return "unknown";
}

std::string to_string(ModelId m) { return m == ModelId::M1 ? "m1" : "m2"; }

ModelId parse_model(const std::string& s) {
  if (s == "m1") return ModelId::M1;
  if (s == "m2") return ModelId::M2;
  throw ConfigError("unknown model '" + s + "' (expected m1 or m2)");
}

void ExperimentSpec::validate() const {
  if (n < 5) throw ConfigError("n must be at least 5 for sample splitting");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (test_size < 1) throw ConfigError("test size must be at least 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be finite and non-negative");
  if (roster.empty()) throw ConfigError("estimator roster is empty");
  if (r_grid.empty() || K_grid.empty() || knn_grid.empty()) throw ConfigError("hyperparameter grids must be nonempty");
  for (auto r : r_grid)
    if (r < 1) throw ConfigError("r grid entries must be at least 1");
  for (auto K : K_grid)
    if (K < 2) throw ConfigError("K grid entries must be at least 2");
  for (auto k : knn_grid)
    if (k < 1) throw ConfigError("k-NN grid entries must be at least 1");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(c1 > 0.0) || !(c3 > 0.0)) throw ConfigError("c1 and c3 must be positive");
  if (avg_realizations < 1) throw ConfigError("avg realizations must be at least 1");
}

double empirical_l2(const PointFn& predict, std::span<const double> test_xs, std::size_t dim,
                    const PointFn& reference) {
  if (dim == 0 || test_xs.empty() || test_xs.size() % dim != 0) {
    throw std::invalid_argument("empirical_l2: test set must be a nonempty n x d matrix");
  }
  const std::size_t N = test_xs.size() / dim;
  std::vector<double> sq(N);
  const auto count = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto x = test_xs.subspan(static_cast<std::size_t>(i) * dim, dim);
    const double e = predict(x) - reference(x);
    sq[i] = e * e;
  }
  double s = 0.0;
  for (double v : sq) s += v;
  return s / static_cast<double>(N);
}

double avg_reference(const PointFn& target, double noise_sd, std::size_t n, std::span<const double> test_xs,
                     std::size_t realizations, std::uint64_t seed) {
  std::vector<double> errs;
  errs.reserve(realizations);
  for (std::size_t i = 0; i < realizations; ++i) {
    const DataSet sample = generate_sample(target, noise_sd, n, stream_seed(seed, i));
    const double c = constant_average(sample);
    errs.push_back(empirical_l2([c](std::span<const double>) { return c; }, test_xs, kSyntheticDim, target));
  }
  return median(errs);
}

std::vector<double> experiment_test_set(const ExperimentSpec& spec) {
  return generate_design(spec.test_size, stream_seed(spec.seed, kTestStream));
}

namespace {

PointFn target_of(ModelId model) {
  return [model](std::span<const double> x) { return eval_target(model, x); };
}

double avg_reference_on(const ExperimentSpec& spec, std::span<const double> test_xs) {
  const SyntheticSpec syn = make_synthetic_spec(spec.model, spec.noise);
  return avg_reference(target_of(spec.model), syn.noise_fraction * syn.tau, spec.n, test_xs, spec.avg_realizations,
                       stream_seed(spec.seed, kAvgStream));
}

}  // namespace

double avg_reference(const ExperimentSpec& spec) { return avg_reference_on(spec, experiment_test_set(spec)); }

ResultTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
  spec.validate();
  const SyntheticSpec syn = make_synthetic_spec(spec.model, spec.noise);
  const std::vector<double> test_xs = experiment_test_set(spec);
  const PointFn target = target_of(spec.model);
  const double avg = avg_reference_on(spec, test_xs);
  if (progress) progress("avg_reference = " + format_double(avg));

  ResultTable table;
  for (Estimator e : spec.roster) {
    ResultRow row;
    row.model = spec.model;
    row.noise = spec.noise;
    row.n = spec.n;
    row.estimator = e;
    row.avg_reference = avg;
    table.rows.push_back(std::move(row));
  }

  ScheduleOptions opts;
  opts.c1 = spec.c1;
  opts.c3 = spec.c3;
  opts.restarts = spec.restarts;
  opts.steps = spec.steps;
  opts.steps_cap = spec.steps_cap;

  const std::uint64_t rep_root = stream_seed(spec.seed, kRepStream);
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    const std::uint64_t rep_seed = stream_seed(rep_root, rep);
    const DataSet sample = generate_sample(syn, spec.n, stream_seed(rep_seed, 0));
    const std::uint64_t split_seed = stream_seed(rep_seed, 1);

    for (ResultRow& row : table.rows) {
      try {
        double err = 0.0;
        switch (row.estimator) {
          case Estimator::Neural: {
            ScheduleOptions o = opts;
            o.seed = stream_seed(rep_seed, 2);
            const SelectionResult sel = select_hyperparams(sample, spec.r_grid, spec.K_grid, o, split_seed);
            const TrainedModel model = fit(sample, sel.config);
            err = empirical_l2([&model](std::span<const double> x) { return predict(model, x); }, test_xs,
                               kSyntheticDim, target);
            break;
          }
          case Estimator::Neighbor: {
            const KnnSelection sel = select_k(sample, spec.knn_grid, split_seed);
            err = empirical_l2([&sel](std::span<const double> x) { return knn_predict(sel.model, x); }, test_xs,
                               kSyntheticDim, target);
            break;
          }
          case Estimator::Constant: {
            const double c = constant_average(sample);
            err = empirical_l2([c](std::span<const double>) { return c; }, test_xs, kSyntheticDim, target);
            break;
          }
        }
        row.scaled_errors.push_back(err / avg);
      } catch (const std::exception& ex) {
        row.scaled_errors.push_back(std::numeric_limits<double>::quiet_NaN());
        row.failure_messages.push_back("repetition " + std::to_string(rep) + ": " + ex.what());
        ++row.failures;
      }
    }
    if (progress) {
      std::ostringstream os;
      os << "repetition " << (rep + 1) << "/" << spec.repetitions;
      for (const ResultRow& row : table.rows) os << "  " << to_string(row.estimator) << "=" << row.scaled_errors.back();
      progress(os.str());
    }
  }

  for (ResultRow& row : table.rows) {
    std::vector<double> ok;
    for (double v : row.scaled_errors)
      if (!std::isnan(v)) ok.push_back(v);
    row.repetitions = ok.size();
    if (ok.empty()) {
      row.median_scaled_error = std::numeric_limits<double>::quiet_NaN();
      row.iqr = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.median_scaled_error = median(ok);
      row.iqr = iqr(ok);
    }
  }
  return table;
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "model,noise,n,estimator,median_scaled_error,iqr,repetitions,avg_reference\n";
  for (const ResultRow& r : table.rows) {
    os << to_string(r.model) << ',' << format_double(r.noise) << ',' << r.n << ',' << to_string(r.estimator) << ','
       << format_double(r.median_scaled_error) << ',' << format_double(r.iqr) << ',' << r.repetitions << ','
       << format_double(r.avg_reference) << '\n';
  }
  return os.str();
}

std::string to_json(const ResultTable& table, const ExperimentSpec& spec) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows = json::array();
  for (const ResultRow& r : table.rows) {
    json errs = json::array();
    for (double v : r.scaled_errors) errs.push_back(num(v));
    rows.push_back({{"model", to_string(r.model)},
                    {"noise", r.noise},
                    {"n", r.n},
                    {"estimator", to_string(r.estimator)},
                    {"median_scaled_error", num(r.median_scaled_error)},
                    {"iqr", num(r.iqr)},
                    {"repetitions", r.repetitions},
                    {"failures", r.failures},
                    {"failure_messages", r.failure_messages},
                    {"avg_reference", num(r.avg_reference)},
                    {"scaled_errors", errs}});
  }
  json s = {{"model", to_string(spec.model)},
            {"noise", spec.noise},
            {"n", spec.n},
            {"repetitions", spec.repetitions},
            {"test_size", spec.test_size},
            {"r_grid", spec.r_grid},
            {"K_grid", spec.K_grid},
            {"knn_grid", spec.knn_grid},
            {"restarts", spec.restarts},
            {"steps", spec.steps ? json(*spec.steps) : json(nullptr)},
            {"steps_cap", spec.steps_cap ? json(*spec.steps_cap) : json(nullptr)},
            {"c1", spec.c1},
            {"c3", spec.c3},
            {"avg_realizations", spec.avg_realizations},
            {"seed", spec.seed}};
  return json({{"spec", s}, {"rows", rows}}).dump(2) + "\n";
}

}  // namespace ppgd
