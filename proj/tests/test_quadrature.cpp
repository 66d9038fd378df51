#include <doctest.h>

#include <cmath>

#include "casimir/error.hpp"
#include "casimir/numeric/quadrature.hpp"

using namespace casimir;
using namespace casimir::numeric;

TEST_CASE("polynomials are exact on one panel") {
  auto f = [](double x) { return Vec<2>{x * x * x * x * x, 1.0 + x}; };
  const auto r = integrate<2>(f, 0.0, 2.0);
  CHECK(r.value[0] == doctest::Approx(64.0 / 6.0).epsilon(1e-14));
  CHECK(r.value[1] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("exponential kernels") {
  // int_0^inf x^3 e^-x dx = 6 on a mapped variable, truncated at 60
  auto f = [](double x) { return Vec<1>{x * x * x * std::exp(-x)}; };
  const std::array<double, 4> bp{0.0, 5.0, 20.0, 60.0};
  const auto r = integrate<1>(f, std::span<const double>(bp));
  CHECK(r.value[0] == doctest::Approx(6.0).epsilon(1e-10));

  // Bose-like integrand, int_0^inf x^3/(e^x - 1) = pi^4/15
  auto g = [](double x) { return Vec<1>{x == 0.0 ? 0.0 : x * x * x / std::expm1(x)}; };
  const std::array<double, 5> bq{0.0, 2.0, 10.0, 40.0, 120.0};
  const auto s = integrate<1>(g, std::span<const double>(bq));
  const double pi = 3.14159265358979323846;
  CHECK(s.value[0] == doctest::Approx(std::pow(pi, 4) / 15.0).epsilon(1e-10));
}

TEST_CASE("endpoint singularity is resolved adaptively") {
  auto f = [](double x) { return Vec<1>{1.0 / std::sqrt(x)}; };
  QuadratureOptions opt;
  opt.rel_tol = 1e-8;
  const auto r = integrate<1>(f, 0.0, 1.0, opt);
  CHECK(r.value[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.error[0] <= 1e-8 * 2.0);
}

TEST_CASE("vector components converge jointly") {
  auto f = [](double x) { return Vec<3>{std::sin(x), std::cos(x), std::exp(-x * x)}; };
  const auto r = integrate<3>(f, 0.0, 10.0);
  CHECK(r.value[0] == doctest::Approx(1.0 - std::cos(10.0)).epsilon(1e-10));
  CHECK(r.value[1] == doctest::Approx(std::sin(10.0)).epsilon(1e-10));
  CHECK(r.value[2] == doctest::Approx(0.5 * std::sqrt(3.14159265358979323846) * std::erf(10.0)).epsilon(1e-10));
}

TEST_CASE("non-convergence reports an error") {
  auto f = [](double x) { return Vec<1>{std::sin(1.0 / x) / x}; };
  QuadratureOptions opt;
  opt.max_segments = 20;
  CHECK_THROWS_AS(integrate<1>(f, 1e-6, 1.0, opt), NumericalError);
  CHECK_THROWS_AS(integrate<1>(f, std::span<const double>{}), DomainError);
}
