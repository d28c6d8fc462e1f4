#include "ppgd/linear_gd.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ppgd/errors.hpp"

namespace ppgd {

void LinearProblem::validate() const {
  if (design.rows() == 0 || design.cols() == 0) throw ConfigError("linear problem: empty design");
  if (targets.size() != design.rows()) throw ConfigError("linear problem: targets and design disagree");
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw ConfigError("linear problem: c1 must be positive");
  if (!design.allFinite() || !targets.allFinite()) throw ConfigError("linear problem: non-finite entry");
}

double linear_risk(const Eigen::VectorXd& a, const LinearProblem& prob) {
  const double n = static_cast<double>(prob.samples());
  return (prob.design * a - prob.targets).squaredNorm() / n + prob.penalty / n * a.squaredNorm();
}

Eigen::VectorXd linear_gradient(const Eigen::VectorXd& a, const LinearProblem& prob) {
  const double n = static_cast<double>(prob.samples());
  const auto& B = prob.design;
  return 2.0 / n * (B.transpose() * (B * a) - B.transpose() * prob.targets) + 2.0 * prob.penalty / n * a;
}

Eigen::VectorXd closed_form_optimum(const LinearProblem& prob) {
  prob.validate();
  const double n = static_cast<double>(prob.samples());
  Eigen::MatrixXd A = prob.design.transpose() * prob.design / n;
  A.diagonal().array() += prob.penalty / n;
  const Eigen::VectorXd rhs = prob.design.transpose() * prob.targets / n;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    // Only reachable when c1/n underflows against B^T B; fall back to LDLT.
    return A.ldlt().solve(rhs);
  }
  return llt.solve(rhs);
}

double smoothness_constant(const LinearProblem& prob) {
  const double n = static_cast<double>(prob.samples());
  double s = 0.0;
  for (Eigen::Index k = 0; k < prob.design.cols(); ++k) s += prob.design.col(k).squaredNorm() / n;
  return 2.0 * s + 2.0 * prob.penalty / n;
}

double pl_constant(const LinearProblem& prob) { return 4.0 * prob.penalty / static_cast<double>(prob.samples()); }

namespace {

double slack(double scale) { return kCertRelTol * std::abs(scale) + kCertAbsTol; }

[[noreturn]] void violation(const char* what, std::size_t t, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << " violated at step " << t << ": " << lhs << " > " << rhs;
  throw CertificationError(os.str());
}

}  // namespace

GDCertificate run_linear_gd(const LinearProblem& prob, const Eigen::VectorXd& a0, std::size_t steps) {
  prob.validate();
  if (steps < 1) throw ConfigError("run_linear_gd needs at least one step");
  if (a0.size() != prob.design.cols()) throw ConfigError("run_linear_gd: start point has the wrong length");

  GDCertificate cert;
  cert.smoothness = smoothness_constant(prob);
  cert.pl_constant = pl_constant(prob);
  cert.contraction = 1.0 - cert.pl_constant / (2.0 * cert.smoothness);
  const Eigen::VectorXd opt = closed_form_optimum(prob);
  cert.optimum_risk = linear_risk(opt, prob);

  const double step = 1.0 / cert.smoothness;
  Eigen::VectorXd a = a0;
  double risk = linear_risk(a, prob);
  const double gap0 = risk - cert.optimum_risk;
  cert.trajectory_gaps.push_back(gap0);
  if (gap0 < -kCertAbsTol) violation("optimality of the closed-form solution", 0, cert.optimum_risk, risk);

  cert.min_decrease_slack = std::numeric_limits<double>::infinity();
  double power = 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd g = linear_gradient(a, prob);
    const double gnorm2 = g.squaredNorm();
    a -= step * g;
    const double next = linear_risk(a, prob);

    // sufficient decrease
    const double allowed = risk - gnorm2 / (2.0 * cert.smoothness);
    cert.min_decrease_slack = std::min(cert.min_decrease_slack, allowed - next);
    if (next > allowed + slack(risk)) violation("sufficient decrease", t, next, allowed);

    const double gap = next - cert.optimum_risk;
    const double prev_gap = cert.trajectory_gaps.back();
    power *= cert.contraction;
    if (gap < -kCertAbsTol) violation("non-negative optimality gap", t + 1, -gap, 0.0);
    if (gap > cert.contraction * prev_gap + slack(cert.contraction * prev_gap)) {
      violation("one-step contraction", t + 1, gap, cert.contraction * prev_gap);
    }
    const double bound = power * gap0;
    if (gap > bound + slack(bound)) violation("geometric contraction", t + 1, gap, bound);
    if (bound > 1e3 * kCertAbsTol) cert.max_contraction_ratio = std::max(cert.max_contraction_ratio, gap / bound);
    cert.trajectory_gaps.push_back(gap);
    risk = next;
  }
  cert.final_point = a;
  return cert;
}

std::vector<Eigen::VectorXd> linear_gd_iterates(const LinearProblem& prob, const Eigen::VectorXd& a0,
                                                double step_size, std::size_t steps) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  out.push_back(a0);
  Eigen::VectorXd a = a0;
  for (std::size_t t = 0; t < steps; ++t) {
    a -= step_size * linear_gradient(a, prob);
    out.push_back(a);
  }
  return out;
}

}  // namespace ppgd
