// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fd_oracle.hpp"
#include "helpers.hpp"
#include "ppgd/experiment.hpp"
#include "ppgd/verify.hpp"

#ifndef PPGD_BINARY
#error "PPGD_BINARY must name the ppgd executable"
#endif

using namespace ppgd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " [" << o.detail << "; "
       << static_cast<int>(std::round(secs)) << " s]";
  std::cout << line.str() << std::endl;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome from_suite(const SuiteResult& r, const std::string& detail) { return {r.passed, detail}; }

Outcome gradient_check() {
  Rng rng(20240601);
  double worst = 0.0;
  std::size_t coords = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.index(4), M = 1 + rng.index(10), n = 1 + rng.index(50);
    const DataSet data = testutil::random_data(rng, n, d);
    const NetworkParams p = testutil::random_params(rng, M, d, 10.0);
    const double c1 = rng.uniform(0.1, 3.0);
    const NetworkParams g = gradient(p, data, c1);
    const NetworkParams fd = testutil::fd_gradient(p, data, c1);
    for (std::size_t q = 0; q < g.outer.size(); ++q, ++coords) worst = std::max(worst, testutil::fd_error(g.outer[q], fd.outer[q]));
    for (std::size_t q = 0; q < g.inner.size(); ++q, ++coords) worst = std::max(worst, testutil::fd_error(g.inner[q], fd.inner[q]));
  }
  return {worst < 1e-6, std::to_string(coords) + " coordinates, max relative error " + num(worst)};
}

struct StudyCell {
  double neural = NAN, neighbor = NAN, avg = NAN;
  std::size_t neural_failures = 0;
};

StudyCell run_cell(std::size_t n) {
  ExperimentSpec s;
  s.model = ModelId::M1;
  s.noise = 0.05;
  s.n = n;
  s.repetitions = 10;
  s.restarts = 50;
  s.steps_cap = 5000;
  s.roster = {Estimator::Neural, Estimator::Neighbor};
  s.seed = 1;
  const ResultTable t = run_experiment(s, [n](const std::string& line) {
    std::cerr << "  [n=" << n << "] " << line << std::endl;
  });
  StudyCell c;
  c.neural = t.rows[0].median_scaled_error;
  c.neural_failures = t.rows[0].failures;
  c.neighbor = t.rows[1].median_scaled_error;
  c.avg = t.rows[0].avg_reference;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  testutil::TempDir dir("accept");
  const std::string base = std::string(PPGD_BINARY) +
                           " simulate --model m1 --noise 0.05 --n 60 --reps 3 --restarts 8 --steps-cap 400"
                           " --test-size 2000 --avg-realizations 10 --seed 5";
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4", "1", "2"}) {
    const std::string file = dir.file(std::string("t") + threads + "_" + std::to_string(outputs.size()) + ".csv");
    const std::string cmd = base + " --threads " + threads + " --out " + file;
    if (std::system(cmd.c_str()) != 0) return {false, "simulate exited nonzero: " + cmd};
    outputs.push_back(slurp(file));
  }
  bool same = !outputs[0].empty();
  for (const auto& o : outputs) same = same && o == outputs[0];
  return {same, "4 runs with --threads 1,4,1,2: " + std::string(same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
  const std::uint64_t seed = 1;

  report(1, "gradient matches central finite differences", gradient_check);

  report(2, "linear gradient descent: per-step decrease and geometric contraction", [&] {
    const SuiteResult r = verify_linear_gd(stream_seed(seed, 10));
    const auto& c = r.certificate["descent_and_contraction"];
    return from_suite(r, "100 problems, failures " + c["failures"].dump() + ", max gap/bound " +
                             num(c["max_gap_over_contraction_bound"].get<double>()));
  });

  report(3, "sigmoid-indicator gap bound on [-50, 50]", [] {
    const SuiteResult r = verify_sigmoid_indicator();
    return from_suite(r, r.certificate["points"].dump() + " points, violations " + r.certificate["violations"].dump());
  });

  report(4, "step approximation error within the analytic bound", [&] {
    const SuiteResult r = verify_approx(stream_seed(seed, 11));
    double worst = 0.0;
    for (const auto& cell : r.certificate["cells"])
      worst = std::max(worst, cell["empirical_sup"].get<double>() / cell["bound"].get<double>());
    return from_suite(r, "27 cells, max sup/bound " + num(worst));
  });

  report(5, "initialization invariants on 1000 data sets", [&] {
    const SuiteResult r = verify_init(stream_seed(seed, 12));
    return from_suite(r, r.certificate["checks"].dump() + " checks, violations " + r.certificate["violations"].dump() +
                             ", min margin/guarantee " + num(r.certificate["min_margin_over_guarantee"].get<double>()));
  });

  report(6, "inner weights frozen under the theorem schedule", [&] {
    const SuiteResult r = verify_drift(stream_seed(seed, 13));
    return from_suite(r, r.certificate["steps"].dump() + " steps, total drift " +
                             num(r.certificate["total_inner_drift"].get<double>()) + ", step-bound violations " +
                             r.certificate["step_drift_violations"].dump());
  });

  report(7, "outer-weight trajectory equals linear gradient descent", [&] {
    const SuiteResult r = verify_linear_regime(stream_seed(seed, 14));
    return from_suite(r, "max difference " + num(r.certificate["max_outer_weight_difference"].get<double>()));
  });

  StudyCell n100;
  report(8, "m1, 5% noise, n = 100: avg_reference and estimator ordering", [&] {
    n100 = run_cell(100);
    const bool a = std::abs(n100.avg / 2.0154 - 1.0) <= 0.10;
    const bool b = n100.neural < n100.neighbor;
    const bool c = n100.neural < 0.9;
    return Outcome{a && b && c, "avg_reference " + num(n100.avg) + (a ? " ok" : " off") + ", neural " +
                                    num(n100.neural) + " vs neighbor " + num(n100.neighbor) + ", neural failures " +
                                    std::to_string(n100.neural_failures)};
  });

  report(9, "n = 200 neural median no worse than n = 100 plus 0.05", [&] {
    const StudyCell n200 = run_cell(200);
    const bool ok = std::isfinite(n100.neural) && n200.neural <= n100.neural + 0.05;
    return Outcome{ok, "neural n=200 " + num(n200.neural) + " vs n=100 " + num(n100.neural) + ", neighbor n=200 " +
                           num(n200.neighbor)};
  });

  report(10, "simulate output independent of --threads", determinism);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
