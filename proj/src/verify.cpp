#include "ppgd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ppgd/approx.hpp"
#include "ppgd/dataset.hpp"
#include "ppgd/errors.hpp"
#include "ppgd/format.hpp"
#include "ppgd/init.hpp"
#include "ppgd/linear_gd.hpp"
#include "ppgd/ppnet.hpp"
#include "ppgd/rng.hpp"
#include "ppgd/train.hpp"

namespace ppgd {

using nlohmann::json;

namespace {

double tol(double scale) { return kCertRelTol * std::abs(scale) + kCertAbsTol; }

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index size, double lo, double hi) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

LinearProblem random_problem(Rng& rng) {
  const auto K = static_cast<Eigen::Index>(1 + rng.index(20));
  const auto n = static_cast<Eigen::Index>(1 + rng.index(50));
  LinearProblem prob;
  prob.design.resize(n, K);
  // Half the problems use sigmoid-like features in [0, 1], half signed ones.
  const bool unit = rng.index(2) == 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < K; ++k) prob.design(i, k) = unit ? rng.uniform01() : rng.uniform(-2.0, 2.0);
  prob.targets = random_vector(rng, n, -5.0, 5.0);
  prob.penalty = rng.uniform(0.05, 5.0);
  return prob;
}

}  // namespace

SuiteResult verify_linear_gd(std::uint64_t seed, std::size_t problems) {
  Rng rng(seed);
  std::size_t failures = 0;
  std::vector<std::string> messages;
  double max_ratio = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  double worst_contraction = 0.0;
  bool contraction_in_range = true;

  std::size_t lipschitz_pairs = 0, lipschitz_violations = 0;
  double lipschitz_max_ratio = 0.0;
  std::size_t pl_points = 0, pl_violations = 0;
  double pl_min_ratio = std::numeric_limits<double>::infinity();
  std::size_t perturbations = 0, optimum_violations = 0;

  for (std::size_t q = 0; q < problems; ++q) {
    const LinearProblem prob = random_problem(rng);
    const Eigen::Index K = prob.design.cols();
    const Eigen::VectorXd a0 = random_vector(rng, K, -3.0, 3.0);
    try {
      const GDCertificate cert = run_linear_gd(prob, a0, 200);
      max_ratio = std::max(max_ratio, cert.max_contraction_ratio);
      min_slack = std::min(min_slack, cert.min_decrease_slack);
      worst_contraction = std::max(worst_contraction, cert.contraction);
      if (!(cert.contraction > 0.0 && cert.contraction < 1.0)) contraction_in_range = false;
    } catch (const CertificationError& e) {
      ++failures;
      messages.push_back("problem " + std::to_string(q) + ": " + e.what());
    }

    const double L = smoothness_constant(prob);
    const double mu = pl_constant(prob);
    const Eigen::VectorXd opt = closed_form_optimum(prob);
    const double f_opt = linear_risk(opt, prob);
    for (int s = 0; s < 10; ++s) {
      const Eigen::VectorXd a1 = random_vector(rng, K, -5.0, 5.0);
      const Eigen::VectorXd a2 = random_vector(rng, K, -5.0, 5.0);
      const double lhs = (linear_gradient(a1, prob) - linear_gradient(a2, prob)).norm();
      const double rhs = L * (a1 - a2).norm();
      ++lipschitz_pairs;
      if (rhs > 0.0) lipschitz_max_ratio = std::max(lipschitz_max_ratio, lhs / rhs);
      if (lhs > rhs + tol(rhs)) ++lipschitz_violations;

      const Eigen::VectorXd a = random_vector(rng, K, -5.0, 5.0);
      const double g2 = linear_gradient(a, prob).squaredNorm();
      const double gap = linear_risk(a, prob) - f_opt;
      ++pl_points;
      if (gap > 0.0) pl_min_ratio = std::min(pl_min_ratio, g2 / (mu * gap));
      if (g2 < mu * gap - tol(mu * gap)) ++pl_violations;

      const double scale = std::pow(10.0, rng.uniform(-3.0, 0.0));
      const Eigen::VectorXd pert = opt + scale * random_vector(rng, K, -1.0, 1.0);
      ++perturbations;
      if (linear_risk(pert, prob) < f_opt - tol(f_opt)) ++optimum_violations;
    }
  }

  SuiteResult out;
  out.name = "linear_gd";
  out.passed = failures == 0 && contraction_in_range && lipschitz_violations == 0 && pl_violations == 0 &&
               optimum_violations == 0;
  out.certificate = {
      {"suite", out.name},
      {"passed", out.passed},
      {"problems", problems},
      {"steps_per_problem", 200},
      {"relative_slack", kCertRelTol},
      {"absolute_floor", kCertAbsTol},
      {"descent_and_contraction",
       {{"failures", failures},
        {"messages", messages},
        {"max_gap_over_contraction_bound", max_ratio},
        {"min_decrease_slack", std::isfinite(min_slack) ? json(min_slack) : json(nullptr)},
        {"largest_contraction_factor", worst_contraction},
        {"contraction_in_unit_interval", contraction_in_range}}},
      {"smoothness", {{"pairs", lipschitz_pairs}, {"violations", lipschitz_violations}, {"max_ratio", lipschitz_max_ratio}}},
      {"pl_inequality",
       {{"points", pl_points},
        {"violations", pl_violations},
        {"min_ratio", std::isfinite(pl_min_ratio) ? json(pl_min_ratio) : json(nullptr)}}},
      {"closed_form_optimum", {{"perturbations", perturbations}, {"violations", optimum_violations}}}};
  return out;
}

SuiteResult verify_sigmoid_indicator() {
  std::size_t points = 0, violations = 0;
  double worst_ratio = 0.0;
  for (long q = -50000; q <= 50000; ++q) {
    const double x = static_cast<double>(q) * 1e-3;
    const double gap = sigmoid_indicator_gap(1.0, 0.0, x);
    const double bound = std::exp(-std::abs(x));
    ++points;
    if (gap > bound) ++violations;
    worst_ratio = std::max(worst_ratio, gap / bound);
  }
  // Shifted and scaled indicators.
  const double cs[] = {0.5, 3.0, 100.0};
  const double bs[] = {-2.5, 0.0, 1.75};
  for (double c : cs) {
    for (double b : bs) {
      for (long q = -50000; q <= 50000; q += 7) {
        const double x = static_cast<double>(q) * 1e-3;
        const double gap = sigmoid_indicator_gap(c, b, x);
        const double bound = std::exp(-c * std::abs(x - b));
        ++points;
        if (gap > bound) ++violations;
        if (bound > 0.0) worst_ratio = std::max(worst_ratio, gap / bound);
      }
    }
  }
  SuiteResult out;
  out.name = "sigmoid_indicator";
  out.passed = violations == 0;
  out.certificate = {{"suite", out.name},
                     {"passed", out.passed},
                     {"grid", {{"lo", -50.0}, {"hi", 50.0}, {"step", 1e-3}}},
                     {"points", points},
                     {"violations", violations},
                     {"max_gap_over_bound", worst_ratio}};
  return out;
}

SuiteResult verify_approx(std::uint64_t seed, std::size_t grid_points, std::vector<ApproxRow>* rows_out) {
  constexpr std::size_t d = 4;
  constexpr std::size_t n = 100;
  constexpr double A = 1.0;
  Rng rng(seed);
  DataSet data;
  data.dim = d;
  data.a_bound = A;
  for (std::size_t i = 0; i < n * d; ++i) data.xs.push_back(rng.uniform(-A, A));
  data.ys.assign(n, 0.0);
  const std::vector<double> direction = sample_direction(d, rng);
  const std::vector<double> proj = project(data, direction);

  struct Fn {
    const char* name;
    double (*g)(double);
    double p;
  };
  const Fn fns[] = {{"sin", [](double u) { return std::sin(u); }, 1.0},
                    {"sqrt_abs", [](double u) { return std::sqrt(std::abs(u)); }, 0.5},
                    {"identity", [](double u) { return u; }, 1.0}};
  const std::size_t Ks[] = {5, 20, 80};
  const double rhos[] = {1e2, 1e4, 1e8};

  std::vector<ApproxRow> rows;
  json cells = json::array();
  bool passed = true;
  for (const Fn& fn : fns) {
    RidgeTarget target{fn.g, fn.p, 1.0, direction};
    for (std::size_t K : Ks) {
      const std::vector<double> b = choose_breakpoints(proj, K, A, d);
      for (double rho : rhos) {
        const StepApproximant approx = build_step_approximant(target, b, rho);
        ApproxRow row{fn.name, K, rho, empirical_sup_error(approx, target, A, grid_points),
                      approx_error_bound(fn.p, 1.0, K, A, d, rho, n)};
        const bool ok = row.empirical_sup <= row.bound;
        passed = passed && ok;
        cells.push_back({{"function", row.function},
                         {"K", K},
                         {"rho", rho},
                         {"empirical_sup", row.empirical_sup},
                         {"bound", row.bound},
                         {"ok", ok}});
        rows.push_back(row);
      }
    }
  }
  if (rows_out) *rows_out = rows;
  SuiteResult out;
  out.name = "approx";
  out.passed = passed;
  out.certificate = {{"suite", out.name},
                     {"passed", passed},
                     {"dim", d},
                     {"a_bound", A},
                     {"n", n},
                     {"grid_points", grid_points},
                     {"cells", cells}};
  return out;
}

std::string approx_rows_csv(const std::vector<ApproxRow>& rows) {
  std::ostringstream os;
  os << "function,K,rho,empirical_sup,bound\n";
  for (const auto& r : rows) {
    os << r.function << ',' << r.K << ',' << format_double(r.rho) << ',' << format_double(r.empirical_sup) << ','
       << format_double(r.bound) << '\n';
  }
  return os.str();
}

SuiteResult verify_init(std::uint64_t seed, std::size_t datasets) {
  Rng rng(seed);
  std::size_t checks = 0;
  std::vector<std::string> violations;
  auto expect = [&](bool ok, std::size_t ds, const std::string& what) {
    ++checks;
    if (!ok && violations.size() < 20) violations.push_back("data set " + std::to_string(ds) + ": " + what);
    if (!ok && violations.size() >= 20) violations.back() = "... (more violations)";
  };
  std::size_t violation_count = 0;
  double worst_margin_ratio = std::numeric_limits<double>::infinity();

  for (std::size_t ds = 0; ds < datasets; ++ds) {
    const std::size_t d = 1 + rng.index(6);
    const std::size_t n = 1 + rng.index(200);
    const double A = rng.uniform(1.0, 3.0);
    const std::size_t K = 2 + rng.index(39);
    const std::size_t r = 1 + rng.index(3);
    DataSet data;
    data.dim = d;
    data.a_bound = A;
    data.ys.assign(n, 0.0);
    data.xs.resize(n * d);
    const std::size_t layout = ds % 4;
    std::vector<double> centre(d);
    for (double& c : centre) c = rng.uniform(-A, A);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        switch (layout) {
          case 0: v = rng.uniform(-A, A); break;
          case 1: v = centre[j]; break;                                         // one repeated point
          case 2: v = -A + 0.5 * A * static_cast<double>(rng.index(5)); break;  // lattice
          default: v = rng.index(2) == 0 ? -A : A; break;                       // cube corners
        }
        data.xs[i * d + j] = v;
      }
    }
    const double rho = static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(K);
    const InitPlan plan = make_init_plan(data, r, K, rho, rng);
    const double s = std::sqrt(static_cast<double>(d)) * A;
    const double clearance = breakpoint_clearance(n, K, A, d);
    const double max_gap = 4.0 * s / static_cast<double>(K - 1);
    const std::size_t before = checks;
    std::size_t failed_here = 0;
    auto check = [&](bool ok, const std::string& what) {
      expect(ok, ds, what);
      if (!ok) ++failed_here;
    };
    for (std::size_t c = 0; c < r; ++c) {
      const auto& dir = plan.directions[c];
      double norm = 0.0;
      bool in_cube = true;
      for (double v : dir) {
        norm += v * v;
        in_cube = in_cube && std::abs(v) <= 1.0;
      }
      check(std::abs(std::sqrt(norm) - 1.0) < 1e-12, "direction not unit length");
      check(in_cube, "direction outside [-1,1]^d");
      const auto& b = plan.breakpoints[c];
      check(b.size() == K, "wrong breakpoint count");
      check(b.front() <= -s, "b_1 > -sqrt(d) A");
      check(b.back() >= s - max_gap, "b_K below sqrt(d) A - 4 sqrt(d) A / (K-1)");
      for (std::size_t k = 0; k + 1 < K; ++k) {
        const double gap = b[k + 1] - b[k];
        check(gap >= clearance, "breakpoint spacing below clearance");
        check(gap <= max_gap, "breakpoint spacing above 4 sqrt(d) A / (K-1)");
      }
      const auto proj = project(data, dir);
      double closest = std::numeric_limits<double>::infinity();
      for (double u : proj)
        for (double bk : b) closest = std::min(closest, std::abs(u - bk));
      check(closest >= clearance, "projection closer than clearance to a breakpoint");
    }
    const NetworkParams p0 = build_initial_params(plan, r, K, d);
    const double margin = activation_margin(p0, data);
    worst_margin_ratio = std::min(worst_margin_ratio, margin / (rho * clearance));
    check(margin >= rho * clearance, "initial activation margin below rho * clearance");
    check(forward(p0, data.row(0)) == 0.0, "initial network is not identically zero");
    violation_count += failed_here;
    (void)before;
  }
  SuiteResult out;
  out.name = "init";
  out.passed = violation_count == 0;
  out.certificate = {{"suite", out.name},
                     {"passed", out.passed},
                     {"datasets", datasets},
                     {"checks", checks},
                     {"violations", violation_count},
                     {"messages", violations},
                     {"min_margin_over_guarantee", worst_margin_ratio}};
  return out;
}

SuiteResult verify_drift(std::uint64_t seed) {
  constexpr std::size_t n = 100;
  const DataSet data = generate_sample(make_synthetic_spec(ModelId::M1, 0.05), n, stream_seed(seed, 0));
  ScheduleOptions opts;
  opts.restarts = 1;
  const TrainConfig cfg = config_for(n, 1, 5, opts);
  Rng rng(stream_seed(seed, 1));
  const InitPlan plan = make_init_plan(data, cfg.r, cfg.K, cfg.rho, rng);
  const NetworkParams start = build_initial_params(plan, cfg.r, cfg.K, data.dim);
  const double max_abs_x = data.max_abs_x();

  std::size_t drift_violations = 0, decrease_violations = 0;
  double worst_drift_ratio = 0.0;  // observed / bound over steps with nonzero drift
  double max_step_drift = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  double prev_risk = std::numeric_limits<double>::quiet_NaN();
  double prev_required = 0.0;
  const auto observer = [&](const StepRecord& rec) {
    const double bound = drift_bound(rec.risk, rec.margin, cfg.lambda, rec.outer_norm_sq, max_abs_x);
    max_step_drift = std::max(max_step_drift, rec.max_drift);
    min_margin = std::min(min_margin, rec.margin);
    if (rec.max_drift > bound) ++drift_violations;
    if (rec.max_drift > 0.0) worst_drift_ratio = std::max(worst_drift_ratio, rec.max_drift / bound);
    if (!std::isnan(prev_risk) && rec.risk > prev_required + tol(prev_risk)) ++decrease_violations;
    double step_sq = 0.0;
    for (std::size_t k = 0; k < rec.before->outer.size(); ++k) {
      const double da = rec.after->outer[k] - rec.before->outer[k];
      step_sq += da * da;
    }
    // ||grad_a F||^2 / (2 L) with L = 1 / lambda, from the step itself.
    prev_required = rec.risk - step_sq / (2.0 * cfg.lambda);
    prev_risk = rec.risk;
  };
  const NetworkParams final_params = run_gradient_descent(start, data, cfg.c1, cfg.lambda, cfg.steps, observer);
  const double final_risk = penalized_risk(final_params, data, cfg.c1).total;
  if (final_risk > prev_required + tol(prev_risk)) ++decrease_violations;

  double total_drift = 0.0;
  for (std::size_t q = 0; q < start.inner.size(); ++q) {
    total_drift = std::max(total_drift, std::abs(final_params.inner[q] - start.inner[q]));
  }
  const double initial_margin = activation_margin(start, data);
  const double guarantee = cfg.rho * breakpoint_clearance(n, cfg.K, data.a_bound, data.dim);

  SuiteResult out;
  out.name = "drift";
  out.passed = drift_violations == 0 && decrease_violations == 0 && total_drift <= 1e-8 && initial_margin >= guarantee;
  out.certificate = {{"suite", out.name},
                     {"passed", out.passed},
                     {"n", n},
                     {"r", cfg.r},
                     {"K", cfg.K},
                     {"rho", cfg.rho},
                     {"lambda", cfg.lambda},
                     {"steps", cfg.steps},
                     {"initial_margin", initial_margin},
                     {"margin_guarantee", guarantee},
                     {"min_margin_along_path", min_margin},
                     {"max_step_drift", max_step_drift},
                     {"step_drift_violations", drift_violations},
                     {"max_drift_over_bound", worst_drift_ratio},
                     {"total_inner_drift", total_drift},
                     {"total_drift_limit", 1e-8},
                     {"decrease_violations", decrease_violations},
                     {"final_penalized_risk", final_risk}};
  return out;
}

SuiteResult verify_linear_regime(std::uint64_t seed) {
  constexpr std::size_t n = 100;
  constexpr std::size_t steps = 100;
  const DataSet data = generate_sample(make_synthetic_spec(ModelId::M1, 0.05), n, stream_seed(seed, 2));
  ScheduleOptions opts;
  opts.restarts = 1;
  const TrainConfig cfg = config_for(n, 2, 5, opts);
  Rng rng(stream_seed(seed, 3));
  const InitPlan plan = make_init_plan(data, cfg.r, cfg.K, cfg.rho, rng);
  const NetworkParams start = build_initial_params(plan, cfg.r, cfg.K, data.dim);

  const std::size_t M = start.neurons();
  LinearProblem prob;
  prob.design.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M + 1));
  prob.targets.resize(static_cast<Eigen::Index>(n));
  prob.penalty = cfg.c1;
  for (std::size_t i = 0; i < n; ++i) {
    prob.design(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t k = 0; k < M; ++k) {
      prob.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) =
          sigmoid(pre_activation(start, k, data.row(i)));
    }
    prob.targets[static_cast<Eigen::Index>(i)] = data.ys[i];
  }
  const auto linear = linear_gd_iterates(prob, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M + 1)), cfg.lambda, steps);

  double max_diff = 0.0;
  bool inner_frozen = true;
  const auto observer = [&](const StepRecord& rec) {
    const auto& lin = linear[rec.t + 1];
    for (std::size_t k = 0; k <= M; ++k) {
      max_diff = std::max(max_diff, std::abs(rec.after->outer[k] - lin[static_cast<Eigen::Index>(k)]));
    }
    if (rec.after->inner != start.inner) inner_frozen = false;
  };
  run_gradient_descent(start, data, cfg.c1, cfg.lambda, steps, observer);

  SuiteResult out;
  out.name = "linear_regime";
  out.passed = max_diff <= 1e-10 && inner_frozen;
  out.certificate = {{"suite", out.name},
                     {"passed", out.passed},
                     {"n", n},
                     {"r", cfg.r},
                     {"K", cfg.K},
                     {"rho", cfg.rho},
                     {"lambda", cfg.lambda},
                     {"steps", steps},
                     {"max_outer_weight_difference", max_diff},
                     {"tolerance", 1e-10},
                     {"inner_weights_unchanged", inner_frozen}};
  return out;
}

std::vector<SuiteResult> verify_all(std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(verify_linear_gd(stream_seed(seed, 10)));
  out.push_back(verify_sigmoid_indicator());
  out.push_back(verify_approx(stream_seed(seed, 11)));
  out.push_back(verify_init(stream_seed(seed, 12)));
  out.push_back(verify_drift(stream_seed(seed, 13)));
  out.push_back(verify_linear_regime(stream_seed(seed, 14)));
  return out;
}

}  // namespace ppgd
