#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ppgd {

/// Penalized least squares in the outer weights for a fixed design:
///
///   F(a) = (1/n) ||B a - y||^2 + (c1/n) ||a||^2
///
/// with B_{ik} = B_k(x_i). This is the problem gradient descent on the
/// network reduces to once the inner weights stop moving, and the module
/// certifies the descent and contraction inequalities for it numerically.
struct LinearProblem {
  Eigen::MatrixXd design;   // n x K
  Eigen::VectorXd targets;  // n
  double penalty = 1.0;     // c1 > 0

  std::size_t samples() const { return static_cast<std::size_t>(design.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(design.cols()); }
  /// Throws ConfigError on inconsistent shapes, non-finite entries or c1 <= 0.
  void validate() const;
};

double linear_risk(const Eigen::VectorXd& a, const LinearProblem& prob);

/// (2/n)(B^T B a - B^T y) + (2 c1 / n) a.
Eigen::VectorXd linear_gradient(const Eigen::VectorXd& a, const LinearProblem& prob);

/// Solves ((1/n) B^T B + (c1/n) I) a = (1/n) B^T y by Cholesky.
Eigen::VectorXd closed_form_optimum(const LinearProblem& prob);

/// L = 2 sum_k (1/n) sum_i B_{ik}^2 + 2 c1 / n, a Lipschitz constant of the gradient.
double smoothness_constant(const LinearProblem& prob);

/// 4 c1 / n: ||grad F(a)||^2 >= (4 c1 / n) (F(a) - F(a_opt)) for every a.
double pl_constant(const LinearProblem& prob);

struct GDCertificate {
  double smoothness = 0.0;
  double pl_constant = 0.0;
  double contraction = 0.0;  // 1 - pl / (2 L)
  double optimum_risk = 0.0;
  /// F(a_t) - F(a_opt) for t = 0..steps.
  std::vector<double> trajectory_gaps;
  /// Smallest slack, over all steps, of the sufficient-decrease inequality
  /// F(a_t) - F(a_{t+1}) - ||grad F(a_t)||^2 / (2L); negative values within
  /// tolerance are rounding.
  double min_decrease_slack = 0.0;
  /// Largest ratio gap_t / (contraction^t gap_0) over steps where that bound
  /// is still above 1e3 times the absolute floor (0 if there are none).
  double max_contraction_ratio = 0.0;
  Eigen::VectorXd final_point;
};

/// Gradient descent with step 1/L from a0, checking after every step that
///   F(a_{t+1}) - F(a_t) <= -||grad F(a_t)||^2 / (2L)
///   gap_{t+1} <= contraction * gap_t  and  gap_t <= contraction^t gap_0
/// hold up to relative slack 1e-9 with absolute floor 1e-12. Throws
/// CertificationError on a violation.
GDCertificate run_linear_gd(const LinearProblem& prob, const Eigen::VectorXd& a0, std::size_t steps);

/// Plain iterates a_0..a_steps of gradient descent with an arbitrary step size.
std::vector<Eigen::VectorXd> linear_gd_iterates(const LinearProblem& prob, const Eigen::VectorXd& a0,
                                                double step_size, std::size_t steps);

/// Relative slack used by the certificate checks.
inline constexpr double kCertRelTol = 1e-9;
inline constexpr double kCertAbsTol = 1e-12;

}  // namespace ppgd
