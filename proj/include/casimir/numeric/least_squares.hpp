#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace casimir::numeric {

/// Residual vector r(p) for a weighted problem; the minimized objective is |r|^2.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  /// Converged when every |dp_i| <= x_tol * max(|p_i|, typical_scale_i).
  double x_tol = 1e-10;
  /// Also converged when the relative objective decrease falls below this.
  double f_tol = 1e-15;
  double initial_lambda = 1e-3;
  /// Per-parameter magnitude used by the step test and finite differences.
  Eigen::VectorXd typical_scale;
};

struct IterationRecord {
  int iteration;
  double objective;
  double lambda;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  /// (J^T J)^-1 at the solution; unscaled by the residual variance.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

/// Levenberg-Marquardt (Gauss-Newton with adaptive diagonal damping).
/// A missing Jacobian is replaced by forward differences.
LeastSquaresResult levenberg_marquardt(const ResidualFn& residual, Eigen::VectorXd start,
                                       const LeastSquaresOptions& options = {},
                                       const std::optional<JacobianFn>& jacobian = std::nullopt);

/// Forward-difference Jacobian with steps sqrt(eps) * max(|p_i|, scale_i).
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p,
                                           const Eigen::VectorXd& scale);

std::string format_trace(const std::vector<IterationRecord>& trace);

}  // namespace casimir::numeric
