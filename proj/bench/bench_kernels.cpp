// Serial reference kernels against the production (OpenMP) kernels.
//   ./ppgd_bench --benchmark_filter=Gradient
// Set OMP_NUM_THREADS to vary the worker count.

#include <benchmark/benchmark.h>

#include "ppgd/ppnet.hpp"
#include "ppgd/reference.hpp"
#include "ppgd/rng.hpp"
#include "ppgd/train.hpp"

namespace {

struct Problem {
  ppgd::DataSet data;
  ppgd::NetworkParams params;
};

Problem make_problem(std::size_t n, std::size_t M) {
  ppgd::Rng rng(7);
  Problem p;
  p.data = ppgd::generate_sample(ppgd::make_synthetic_spec(ppgd::ModelId::M1, 0.05), n, 11);
  p.params = ppgd::NetworkParams::zeros(M, p.data.dim);
  for (double& a : p.params.outer) a = rng.uniform(-1, 1);
  for (double& b : p.params.inner) b = rng.uniform(-3, 3);
  return p;
}

void BM_GradientReference(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(ppgd::reference::gradient(p.params, p.data, 1.0));
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(1));
}

void BM_GradientParallel(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(ppgd::gradient(p.params, p.data, 1.0));
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(1));
}

void BM_RiskReference(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(ppgd::reference::penalized_risk(p.params, p.data, 1.0));
}

void BM_RiskParallel(benchmark::State& st) {
  const Problem p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(ppgd::penalized_risk(p.params, p.data, 1.0));
}

// 100 gradient steps from the structured initialisation (saturated regime).
void BM_TrainSteps(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto K = static_cast<std::size_t>(st.range(1));
  const Problem p = make_problem(n, 1);
  ppgd::TrainConfig cfg = ppgd::config_for(n, 2, K, {});
  cfg.steps = 100;
  for (auto _ : st) {
    ppgd::Rng rng(3);
    benchmark::DoNotOptimize(ppgd::train_once(p.data, cfg, rng));
  }
}

void BM_GdStepReference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto K = static_cast<std::size_t>(st.range(1));
  const Problem p = make_problem(n, 1);
  ppgd::TrainConfig cfg = ppgd::config_for(n, 2, K, {});
  ppgd::Rng rng(3);
  const ppgd::InitPlan plan = ppgd::make_init_plan(p.data, cfg.r, cfg.K, cfg.rho, rng);
  const ppgd::NetworkParams start = ppgd::build_initial_params(plan, cfg.r, cfg.K, p.data.dim);
  for (auto _ : st) {
    ppgd::NetworkParams w = start;
    for (int t = 0; t < 100; ++t) {
      const ppgd::NetworkParams g = ppgd::reference::gradient(w, p.data, cfg.c1);
      for (std::size_t q = 0; q < w.outer.size(); ++q) w.outer[q] -= cfg.lambda * g.outer[q];
      for (std::size_t q = 0; q < w.inner.size(); ++q) w.inner[q] -= cfg.lambda * g.inner[q];
    }
    benchmark::DoNotOptimize(w);
  }
}

}  // namespace

BENCHMARK(BM_GradientReference)->Args({100, 10})->Args({1000, 40})->Args({10000, 40});
BENCHMARK(BM_GradientParallel)->Args({100, 10})->Args({1000, 40})->Args({10000, 40});
BENCHMARK(BM_RiskReference)->Args({1000, 40})->Args({10000, 40});
BENCHMARK(BM_RiskParallel)->Args({1000, 40})->Args({10000, 40});
BENCHMARK(BM_GdStepReference)->Args({100, 10})->Args({200, 20});
BENCHMARK(BM_TrainSteps)->Args({100, 10})->Args({200, 20});

BENCHMARK_MAIN();
