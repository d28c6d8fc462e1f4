#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <omp.h>

#include "helpers.hpp"
#include "ppgd/errors.hpp"
#include "ppgd/linear_gd.hpp"
#include "ppgd/train.hpp"

using namespace ppgd;

namespace {

// Design [1, sigma(z_ik)] induced by fixed inner weights.
LinearProblem induced_problem(const NetworkParams& p, const DataSet& data, double c1) {
  LinearProblem prob;
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto M = p.neurons();
  prob.design.resize(n, static_cast<Eigen::Index>(M + 1));
  prob.targets.resize(n);
  prob.penalty = c1;
  for (Eigen::Index i = 0; i < n; ++i) {
    prob.design(i, 0) = 1.0;
    for (std::size_t k = 0; k < M; ++k) {
      prob.design(i, static_cast<Eigen::Index>(k + 1)) = sigmoid(pre_activation(p, k, data.row(static_cast<std::size_t>(i))));
    }
    prob.targets[i] = data.ys[static_cast<std::size_t>(i)];
  }
  return prob;
}

DataSet m1_sample(std::size_t n, std::uint64_t seed) {
  return generate_sample(make_synthetic_spec(ModelId::M1, 0.05), n, seed);
}

}  // namespace

TEST_CASE("theorem schedule at n = 100") {
  const TrainConfig c = theorem_schedule(100, 1.0, 1, 1.0);
  CHECK(c.K == 2);
  CHECK(c.beta == doctest::Approx(4.605170185988091).epsilon(1e-15));
  CHECK(c.lambda == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(c.rho == 20000.0);
  CHECK(c.steps == 4242);
}

TEST_CASE("config_for fills lambda and rho from (n, r, K)") {
  ScheduleOptions o;
  const TrainConfig c = config_for(100, 2, 5, o);
  CHECK(c.lambda == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  CHECK(c.rho == 50000.0);
  CHECK(c.steps == static_cast<std::size_t>(std::ceil(5 * 100 * std::pow(std::log(100.0), 2))));
  o.steps_cap = 100;
  CHECK(config_for(100, 2, 5, o).steps == 100);
  o.steps = 7;
  CHECK(config_for(100, 2, 5, o).steps == 7);
  CHECK_THROWS_AS(config_for(100, 2, 1, o), ConfigError);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  c.steps = 1;
  CHECK_NOTHROW(c.validate());
  TrainConfig bad = c;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.beta = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.restarts = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gd_step at a stationary point leaves params unchanged") {
  DataSet d;
  d.dim = 2;
  d.xs = {0.1, 0.2, -0.3, 0.4};
  d.ys = {0.0, 0.0};
  Rng rng(1);
  NetworkParams p = testutil::random_params(rng, 3, 2, 1.0);
  std::fill(p.outer.begin(), p.outer.end(), 0.0);
  CHECK(gd_step(p, d, 1.0, 0.1) == p);
}

TEST_CASE("first step from zero outer weights moves only a") {
  Rng rng(2);
  const DataSet d = testutil::random_data(rng, 25, 3);
  NetworkParams p = testutil::random_params(rng, 4, 3, 2.0);
  std::fill(p.outer.begin(), p.outer.end(), 0.0);
  const double lambda = 0.05;
  const NetworkParams g = gradient(p, d, 1.0);
  const NetworkParams next = gd_step(p, d, 1.0, lambda);
  CHECK(next.inner == p.inner);
  for (std::size_t k = 0; k < p.outer.size(); ++k) CHECK(next.outer[k] == doctest::Approx(-lambda * g.outer[k]).epsilon(1e-15));
}

TEST_CASE("a saturated step matches linear gradient descent on the induced design") {
  const DataSet d = m1_sample(60, 3);
  ScheduleOptions o;
  const TrainConfig c = config_for(60, 2, 4, o);
  Rng rng(4);
  const InitPlan plan = make_init_plan(d, c.r, c.K, c.rho, rng);
  NetworkParams p = build_initial_params(plan, c.r, c.K, d.dim);
  Rng wr(5);
  for (double& a : p.outer) a = wr.uniform(-1, 1);
  const LinearProblem prob = induced_problem(p, d, c.c1);
  Eigen::VectorXd a0(static_cast<Eigen::Index>(p.outer.size()));
  for (std::size_t k = 0; k < p.outer.size(); ++k) a0[static_cast<Eigen::Index>(k)] = p.outer[k];
  const auto lin = linear_gd_iterates(prob, a0, c.lambda, 1);
  const NetworkParams next = gd_step(p, d, c.c1, c.lambda);
  for (std::size_t k = 0; k < p.outer.size(); ++k) CHECK(std::abs(next.outer[k] - lin[1][static_cast<Eigen::Index>(k)]) <= 1e-10);
}

TEST_CASE("train_once with zero steps returns the zero network") {
  const DataSet d = m1_sample(40, 6);
  TrainConfig c = config_for(40, 1, 3, {});
  c.steps = 0;
  Rng rng(1);
  const CandidateModel m = train_once(d, c, rng);
  double s = 0.0;
  for (double y : d.ys) s += y * y;
  CHECK(m.penalized_risk == doctest::Approx(s / 40.0).epsilon(1e-14));
  CHECK(m.steps_run == 0);
}

TEST_CASE("train_once is deterministic per seed") {
  const DataSet d = m1_sample(40, 7);
  TrainConfig c = config_for(40, 2, 3, {});
  c.steps = 200;
  Rng a(3), b(3);
  const CandidateModel x = train_once(d, c, a);
  const CandidateModel y = train_once(d, c, b);
  CHECK(x.params == y.params);
  CHECK(x.plan == y.plan);
  CHECK(x.penalized_risk == y.penalized_risk);
}

TEST_CASE("penalized risk never increases along a saturated trajectory") {
  Rng src(8);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 10 + src.index(60), K = 2 + src.index(8);
    const DataSet d = m1_sample(n, 100 + t);
    TrainConfig c = config_for(n, 1, K, {});
    c.steps = 300;
    Rng rng(stream_seed(9, t));
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    train_once(d, c, rng, [&](const StepRecord& r) {
      if (r.risk > prev * (1.0 + 1e-12) + 1e-15) monotone = false;
      prev = r.risk;
    });
    CHECK(monotone);
  }
}

TEST_CASE("fit with one restart is train_once on stream 0") {
  const DataSet d = m1_sample(50, 9);
  TrainConfig c = config_for(50, 1, 4, {});
  c.steps = 150;
  c.restarts = 1;
  c.seed = 21;
  const TrainedModel m = fit(d, c);
  Rng rng(stream_seed(21, 0));
  const CandidateModel once = train_once(d, c, rng);
  CHECK(m.best.params == once.params);
  CHECK(m.best.penalized_risk == once.penalized_risk);
  CHECK(m.beta == c.beta);
}

TEST_CASE("fit keeps the best restart and more restarts never hurt") {
  const DataSet d = m1_sample(50, 10);
  TrainConfig c = config_for(50, 2, 3, {});
  c.steps = 200;
  c.seed = 4;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t R : {1, 2, 4, 8}) {
    c.restarts = R;
    const TrainedModel m = fit(d, c);
    REQUIRE(m.restart_risks.size() == R);
    for (double v : m.restart_risks) CHECK(m.best.penalized_risk <= v);
    CHECK(m.best.penalized_risk <= prev);
    prev = m.best.penalized_risk;
  }
}

TEST_CASE("fit does not depend on the thread count") {
  const DataSet d = m1_sample(50, 11);
  TrainConfig c = config_for(50, 2, 3, {});
  c.steps = 100;
  c.restarts = 6;
  omp_set_num_threads(1);
  const TrainedModel a = fit(d, c);
  omp_set_num_threads(4);
  const TrainedModel b = fit(d, c);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(a.best.params == b.best.params);
  CHECK(a.restart_risks == b.restart_risks);
}

TEST_CASE("predict is truncated forward") {
  const DataSet d = m1_sample(50, 12);
  TrainConfig c = config_for(50, 2, 3, {});
  c.steps = 300;
  c.restarts = 2;
  TrainedModel m = fit(d, c);
  Rng rng(13);
  std::vector<std::vector<double>> pts;
  double biggest = 0.0;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(-1, 1);
    biggest = std::max(biggest, std::abs(forward(m.best.params, x)));
    pts.push_back(x);
  }
  m.beta = 0.5 * biggest;
  bool saw_inside = false, saw_clamped = false;
  for (const auto& x : pts) {
    const double f = forward(m.best.params, x);
    const double y = predict(m, x);
    CHECK(std::abs(y) <= m.beta);
    if (std::abs(f) < m.beta) {
      CHECK(y == f);
      saw_inside = true;
    } else {
      CHECK(std::abs(y) == m.beta);
      saw_clamped = true;
    }
  }
  CHECK(saw_inside);
  CHECK(saw_clamped);
}

TEST_CASE("split_sample partitions the rows") {
  const DataSet d = m1_sample(23, 14);
  const SampleSplit s = split_sample(d, 5);
  CHECK(s.learning.size() == 19);
  CHECK(s.testing.size() == 4);
  std::vector<double> all = s.learning.ys;
  all.insert(all.end(), s.testing.ys.begin(), s.testing.ys.end());
  std::vector<double> orig = d.ys;
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);
  CHECK(split_sample(d, 5).learning == s.learning);
  CHECK_THROWS_AS(split_sample(m1_sample(4, 1), 1), ConfigError);
}

TEST_CASE("select_hyperparams returns the argmin cell") {
  const DataSet d = m1_sample(60, 15);
  ScheduleOptions o;
  o.restarts = 3;
  o.steps_cap = 300;
  o.seed = 2;
  const std::vector<std::size_t> r1{2}, K1{4};
  const SelectionResult single = select_hyperparams(d, r1, K1, o, 7);
  CHECK(single.r == 2);
  CHECK(single.K == 4);
  CHECK(single.config.r == 2);
  CHECK(single.config.K == 4);
  CHECK(single.config.rho == 60.0 * 60.0 * 4.0);

  const std::vector<std::size_t> rg{1, 2}, Kg{5, 10, 20};
  const SelectionResult sel = select_hyperparams(d, rg, Kg, o, 7);
  REQUIRE(sel.cell_risks.size() == 6);
  std::size_t ir = sel.r == 1 ? 0 : 1;
  std::size_t iK = sel.K == 5 ? 0 : (sel.K == 10 ? 1 : 2);
  const double won = sel.cell_risks[iK * 2 + ir];
  for (double v : sel.cell_risks) CHECK(won <= v);
}

TEST_CASE("on m1 samples r = 1 is chosen more often than r = 2") {
  ScheduleOptions o;
  o.restarts = 5;
  o.steps_cap = 1000;
  const std::vector<std::size_t> rg{1, 2}, Kg{5, 10, 20};
  int ones = 0, twos = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DataSet d = m1_sample(100, 1000 + s);
    o.seed = stream_seed(77, s);
    const SelectionResult sel = select_hyperparams(d, rg, Kg, o, stream_seed(78, s));
    (sel.r == 1 ? ones : twos)++;
  }
  MESSAGE("r = 1 chosen " << ones << " times, r = 2 chosen " << twos << " times");
  CHECK(ones > twos);
}

TEST_CASE("activation_margin") {
  DataSet d;
  d.dim = 2;
  d.xs = {0.5, -1.0};
  d.ys = {0.0};
  CHECK(activation_margin(NetworkParams::zeros(3, 2), d) == 0.0);
  NetworkParams p = NetworkParams::zeros(1, 2);
  p.inner = {0.25, 2.0, 1.5};  // 0.25 + 1.0 - 1.5
  CHECK(activation_margin(p, d) == 0.25);
  CHECK(activation_margin(NetworkParams::zeros(0, 2), d) == 0.0);
}

TEST_CASE("drift_bound limits") {
  CHECK(drift_bound(1.0, 2000.0, 0.1, 4.0, 1.0) == 0.0);
  CHECK(drift_bound(1.0, 0.0, 0.0, 4.0, 1.0) == 0.0);
  CHECK(drift_bound(4.0, 0.0, 0.5, 9.0, 0.5) == doctest::Approx(0.5 * 2.0 * 2.0 * 1.0 * 3.0));
}

TEST_CASE("every observed inner step stays within drift_bound") {
  // Small rho so the inner weights really move.
  Rng src(16);
  for (int t = 0; t < 10; ++t) {
    const DataSet d = m1_sample(30, 200 + t);
    TrainConfig c = config_for(30, 2, 3, {});
    c.rho = src.uniform(0.5, 5.0);
    c.steps = 300;
    Rng rng(stream_seed(16, t));
    std::size_t moved = 0, violations = 0;
    train_once(d, c, rng, [&](const StepRecord& r) {
      if (r.max_drift > 0.0) ++moved;
      if (r.max_drift > drift_bound(r.risk, r.margin, c.lambda, r.outer_norm_sq, d.max_abs_x())) ++violations;
    });
    CHECK(moved > 0);
    CHECK(violations == 0);
  }
}
