#include <doctest.h>

#include <cmath>

#include "casimir/numeric/least_squares.hpp"

using namespace casimir::numeric;

TEST_CASE("exponential decay fit recovers parameters") {
  const int n = 40;
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = 0.1 * i;
    y[i] = 2.5 * std::exp(-1.3 * t[i]) + 0.4;
  }
  auto r = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = p[0] * std::exp(-p[1] * t[i]) + p[2] - y[i];
    return out;
  };
  Eigen::VectorXd p0(3);
  p0 << 1.0, 0.5, 0.0;
  const auto fit = levenberg_marquardt(r, p0);
  CHECK(fit.converged);
  CHECK(fit.params[0] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit.params[1] == doctest::Approx(1.3).epsilon(1e-9));
  CHECK(fit.params[2] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(fit.objective < 1e-20);
  CHECK(!fit.trace.empty());
}

TEST_CASE("linear problem covariance matches normal equations") {
  const int n = 10;
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = i;
    y[i] = 3.0 + 0.5 * i + ((i % 2) ? 0.1 : -0.1);
  }
  auto r = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return a * p - y; };
  auto j = [&](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
  const auto fit = levenberg_marquardt(r, Eigen::VectorXd::Zero(2), {}, JacobianFn(j));
  const Eigen::VectorXd exact = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  CHECK(fit.params[0] == doctest::Approx(exact[0]).epsilon(1e-10));
  CHECK(fit.params[1] == doctest::Approx(exact[1]).epsilon(1e-10));
  const Eigen::MatrixXd cov = (a.transpose() * a).inverse();
  CHECK(fit.covariance(1, 1) == doctest::Approx(cov(1, 1)).epsilon(1e-8));
  CHECK(fit.covariance(0, 1) == doctest::Approx(cov(0, 1)).epsilon(1e-8));
}

TEST_CASE("finite-difference jacobian") {
  auto r = [](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(2);
    out << p[0] * p[0], std::sin(p[1]);
    return out;
  };
  Eigen::VectorXd p(2);
  p << 3.0, 0.5;
  const auto jac = finite_difference_jacobian(r, p, Eigen::VectorXd::Ones(2));
  CHECK(jac(0, 0) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(jac(1, 1) == doctest::Approx(std::cos(0.5)).epsilon(1e-6));
  CHECK(std::abs(jac(0, 1)) < 1e-12);
}

TEST_CASE("iteration cap is reported") {
  auto r = [](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(2);
    out << 10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0];
    return out;
  };
  Eigen::VectorXd p0(2);
  p0 << -1.2, 1.0;
  LeastSquaresOptions opt;
  opt.max_iterations = 2;
  const auto fit = levenberg_marquardt(r, p0, opt);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 2);
  CHECK(!format_trace(fit.trace).empty());
  const auto full = levenberg_marquardt(r, p0);
  CHECK(full.converged);
  CHECK(full.params[0] == doctest::Approx(1.0).epsilon(1e-8));
}
