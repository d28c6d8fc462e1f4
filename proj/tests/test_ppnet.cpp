#include <doctest.h>

#include <cmath>
#include <vector>

#include <omp.h>

#include "fd_oracle.hpp"
#include "helpers.hpp"
#include "ppgd/errors.hpp"
#include "ppgd/ppnet.hpp"
#include "ppgd/reference.hpp"

using namespace ppgd;

TEST_CASE("sigmoid values") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1e9) == 1.0);
  CHECK(sigmoid(-1e9) == 0.0);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(sigmoid(-1.0) == doctest::Approx(1.0 - 0.7310585786300049).epsilon(1e-15));
  CHECK(std::isfinite(sigmoid(-1e308)));
  // Deep negative tail keeps relative accuracy: sigma(-700) ~ e^-700.
  CHECK(sigmoid(-700.0) == doctest::Approx(std::exp(-700.0)).epsilon(1e-12));
}

TEST_CASE("sigmoid_derivative equals sigma (1 - sigma)") {
  for (double z = -30.0; z <= 30.0; z += 0.37) {
    const double s = sigmoid(z);
    CHECK(sigmoid_derivative(z) == doctest::Approx(s * (1.0 - s)).epsilon(1e-12));
  }
  CHECK(sigmoid_derivative(0.0) == 0.25);
  CHECK(sigmoid_derivative(-600.0) > 0.0);
  CHECK(sigmoid_derivative(1e6) == 0.0);
}

TEST_CASE("truncate") {
  CHECK(truncate(0.3, 1.0) == 0.3);
  CHECK(truncate(5.0, 1.0) == 1.0);
  CHECK(truncate(-5.0, 1.0) == -1.0);
  CHECK(truncate(-1.0, 1.0) == -1.0);
}

TEST_CASE("forward on hand-built networks") {
  const std::vector<double> x{0.3, -0.2};
  NetworkParams p = NetworkParams::zeros(3, 2);
  Rng rng(1);
  for (double& b : p.inner) b = rng.uniform(-5, 5);
  CHECK(forward(p, x) == 0.0);

  NetworkParams one = NetworkParams::zeros(1, 2);
  one.outer[1] = 1.0;
  CHECK(forward(one, x) == 0.5);
}

TEST_CASE("forward agrees with a reverse-order re-implementation") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(5), M = 1 + rng.index(12);
    const NetworkParams p = testutil::random_params(rng, M, d, 2.0);
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(-1, 1);
    double f = 0.0;
    for (std::size_t k = M; k-- > 0;) {
      double z = 0.0;
      for (std::size_t j = d; j-- > 0;) z += p.inner[k * (d + 1) + 1 + j] * x[j];
      z += p.inner[k * (d + 1)];
      f += p.outer[k + 1] / (1.0 + std::exp(-z));
    }
    f += p.outer[0];
    CHECK(testutil::rel_err(forward(p, x), f) < 1e-12);
  }
}

TEST_CASE("penalized_risk examples") {
  DataSet d;
  d.dim = 1;
  d.xs = {0.1, -0.4};
  d.ys = {1.0, -1.0};
  const RiskBreakdown r0 = penalized_risk(NetworkParams::zeros(2, 1), d, 1.0);
  CHECK(r0.empirical == 1.0);
  CHECK(r0.penalty == 0.0);
  CHECK(r0.total == 1.0);

  // Constant network reproducing constant data: only the penalty remains.
  DataSet c = d;
  c.ys = {2.0, 2.0};
  NetworkParams k = NetworkParams::zeros(0, 1);
  k.outer[0] = 2.0;
  const RiskBreakdown rk = penalized_risk(k, c, 3.0);
  CHECK(rk.empirical == 0.0);
  CHECK(rk.total == rk.penalty);
  CHECK(rk.penalty == doctest::Approx(3.0 / 2.0 * 4.0));

  // One point, one neuron: f = 0.5 + 2 sigma(1 + 3 * 0.5), y = 1, c1 = 2, n = 1.
  DataSet s;
  s.dim = 1;
  s.xs = {0.5};
  s.ys = {1.0};
  NetworkParams h = NetworkParams::zeros(1, 1);
  h.outer = {0.5, 2.0};
  h.inner = {1.0, 3.0};
  const double f = 0.5 + 2.0 / (1.0 + std::exp(-2.5));
  const RiskBreakdown rh = penalized_risk(h, s, 2.0);
  CHECK(rh.empirical == doctest::Approx((f - 1.0) * (f - 1.0)).epsilon(1e-15));
  CHECK(rh.penalty == doctest::Approx(2.0 * (0.25 + 4.0)).epsilon(1e-15));
}

TEST_CASE("gradient structure at zero outer weights") {
  Rng rng(3);
  const DataSet d = testutil::random_data(rng, 30, 3);
  NetworkParams p = testutil::random_params(rng, 6, 3, 2.0);
  std::fill(p.outer.begin(), p.outer.end(), 0.0);
  const NetworkParams g = gradient(p, d, 1.0);
  for (double v : g.inner) CHECK(v == 0.0);

  const NetworkParams g0 = gradient(NetworkParams::zeros(6, 3), d, 1.0);
  double sy = 0.0;
  for (double y : d.ys) sy += y;
  CHECK(g0.outer[0] == doctest::Approx(-2.0 / 30.0 * sy).epsilon(1e-14));
}

TEST_CASE("gradient matches long-double central differences") {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.index(4), M = 1 + rng.index(10), n = 1 + rng.index(50);
    const DataSet data = testutil::random_data(rng, n, d);
    const NetworkParams p = testutil::random_params(rng, M, d, 10.0);
    const double c1 = rng.uniform(0.1, 3.0);
    const NetworkParams g = gradient(p, data, c1);
    const NetworkParams fd = testutil::fd_gradient(p, data, c1);
    for (std::size_t q = 0; q < g.outer.size(); ++q) worst = std::max(worst, testutil::fd_error(g.outer[q], fd.outer[q]));
    for (std::size_t q = 0; q < g.inner.size(); ++q) worst = std::max(worst, testutil::fd_error(g.inner[q], fd.inner[q]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("production kernels agree with the serial reference") {
  Rng rng(5);
  // Sizes on both sides of the parallel threshold.
  const std::size_t sizes[][3] = {{20, 3, 4}, {2000, 4, 10}, {3000, 2, 40}};
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    for (const auto& s : sizes) {
      const DataSet data = testutil::random_data(rng, s[0], s[1]);
      const NetworkParams p = testutil::random_params(rng, s[2], s[1], 3.0);
      const RiskBreakdown a = penalized_risk(p, data, 0.7);
      const RiskBreakdown b = reference::penalized_risk(p, data, 0.7);
      CHECK(testutil::rel_err(a.total, b.total) < 1e-12);
      const NetworkParams ga = gradient(p, data, 0.7);
      const NetworkParams gb = reference::gradient(p, data, 0.7);
      // Unit floor: the reference forms sigma (1 - sigma) with cancellation in saturated neurons.
      const auto err = [](double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); };
      double worst = 0.0;
      for (std::size_t q = 0; q < ga.outer.size(); ++q) worst = std::max(worst, err(ga.outer[q], gb.outer[q]));
      for (std::size_t q = 0; q < ga.inner.size(); ++q) worst = std::max(worst, err(ga.inner[q], gb.inner[q]));
      CHECK(worst < 1e-12);
      const std::vector<double> fb = forward_batch(p, data);
      for (std::size_t i = 0; i < data.size(); ++i) REQUIRE(fb[i] == forward(p, data.row(i)));
    }
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("kernels give bitwise identical results for any thread count") {
  Rng rng(6);
  const DataSet data = testutil::random_data(rng, 4000, 4);
  const NetworkParams p = testutil::random_params(rng, 20, 4, 2.0);
  omp_set_num_threads(1);
  const NetworkParams g1 = gradient(p, data, 1.0);
  const double r1 = penalized_risk(p, data, 1.0).total;
  omp_set_num_threads(4);
  const NetworkParams g4 = gradient(p, data, 1.0);
  const double r4 = penalized_risk(p, data, 1.0).total;
  omp_set_num_threads(omp_get_num_procs());
  CHECK(g1 == g4);
  CHECK(r1 == r4);
}

TEST_CASE("HiddenState reproduces forward, risk and gradient") {
  Rng rng(7);
  const DataSet data = testutil::random_data(rng, 40, 3);
  const NetworkParams p = testutil::random_params(rng, 5, 3, 2.0);
  HiddenState st(p, data);
  CHECK(st.samples() == 40);
  CHECK(st.neurons() == 5);
  std::vector<double> res(40);
  st.residuals(p.outer, data, res);
  for (std::size_t i = 0; i < 40; ++i) CHECK(res[i] == doctest::Approx(forward(p, data.row(i)) - data.ys[i]).epsilon(1e-14));
  CHECK(risk_from_residuals(res, p.outer, 1.3).total == doctest::Approx(penalized_risk(p, data, 1.3).total).epsilon(1e-14));
  NetworkParams g = NetworkParams::zeros(5, 3);
  st.gradient(p, data, 1.3, res, g);
  const NetworkParams ref = gradient(p, data, 1.3);
  for (std::size_t q = 0; q < g.outer.size(); ++q) CHECK(g.outer[q] == doctest::Approx(ref.outer[q]).epsilon(1e-13));
  for (std::size_t q = 0; q < g.inner.size(); ++q) CHECK(g.inner[q] == doctest::Approx(ref.inner[q]).epsilon(1e-13));
}

TEST_CASE("params validation") {
  NetworkParams p = NetworkParams::zeros(2, 3);
  CHECK(p.neurons() == 2);
  CHECK(p.inner.size() == 8);
  CHECK_NOTHROW(p.validate());
  p.inner.pop_back();
  CHECK_THROWS_AS(p.validate(), ConfigError);
  NetworkParams q = NetworkParams::zeros(1, 1);
  q.outer[1] = std::nan("");
  CHECK_FALSE(q.all_finite());
}
