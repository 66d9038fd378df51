#include "casimir/numeric/least_squares.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "casimir/error.hpp"

namespace casimir::numeric {

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p,
                                           const Eigen::VectorXd& scale) {
  const Eigen::VectorXd r0 = residual(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    Eigen::VectorXd q = p;
    const double h = root_eps * std::max(std::abs(p[j]), scale[j]);
    q[j] += h;
    jac.col(j) = (residual(q) - r0) / (q[j] - p[j]);
  }
  return jac;
}

LeastSquaresResult levenberg_marquardt(const ResidualFn& residual, Eigen::VectorXd start,
                                       const LeastSquaresOptions& options,
                                       const std::optional<JacobianFn>& jacobian) {
  const Eigen::Index n = start.size();
  Eigen::VectorXd scale = options.typical_scale;
  if (scale.size() != n) scale = Eigen::VectorXd::Ones(n);

  auto jac_at = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
    if (jacobian) return (*jacobian)(p);
    return finite_difference_jacobian(residual, p, scale);
  };

  LeastSquaresResult res;
  Eigen::VectorXd p = std::move(start);
  Eigen::VectorXd r = residual(p);
  if (!r.allFinite()) throw NumericalError("least squares: non-finite residual at start point");
  double f = r.squaredNorm();
  double lambda = options.initial_lambda;
  res.trace.push_back({0, f, lambda});

  for (int it = 1; it <= options.max_iterations; ++it) {
    res.iterations = it;
    const Eigen::MatrixXd J = jac_at(p);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.cwiseAbs().maxCoeff() == 0.0) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    Eigen::VectorXd step;
    double f_new = f;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index i = 0; i < n; ++i)
        A(i, i) += lambda * std::max(JtJ(i, i), 1e-300);
      step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + step;
      const Eigen::VectorXd r_trial = residual(trial);
      if (r_trial.allFinite()) {
        f_new = r_trial.squaredNorm();
        if (f_new <= f) {
          p = trial;
          r = r_trial;
          accepted = true;
          lambda = std::max(lambda / 10.0, 1e-12);
          break;
        }
      }
      lambda *= 10.0;
    }
    res.trace.push_back({it, accepted ? f_new : f, lambda});
    if (!accepted) {
      // No downhill step exists at machine precision: p is a local minimum.
      res.converged = true;
      break;
    }

    bool small_step = true;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(step[i]) > options.x_tol * std::max(std::abs(p[i]), scale[i])) small_step = false;
    const double decrease = f - f_new;
    f = f_new;
    if (small_step || f == 0.0 || decrease <= options.f_tol * f) {
      res.converged = true;
      break;
    }
  }

  res.params = p;
  res.residuals = r;
  res.objective = f;
  const Eigen::MatrixXd J = jac_at(p);
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(JtJ);
  res.covariance = cod.pseudoInverse();
  return res;
}

std::string format_trace(const std::vector<IterationRecord>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,objective,lambda\n";
  for (const auto& t : trace) os << t.iteration << ',' << t.objective << ',' << t.lambda << '\n';
  return os.str();
}

}  // namespace casimir::numeric
