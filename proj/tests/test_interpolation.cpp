#include <doctest.h>

#include <cmath>
#include <vector>

#include "casimir/error.hpp"
#include "casimir/numeric/interpolation.hpp"

using namespace casimir;
using casimir::numeric::MonotoneCubic;

TEST_CASE("reproduces knots and linear data") {
  const std::vector<double> x{0.0, 1.0, 2.5, 4.0};
  const std::vector<double> y{1.0, 3.0, 6.0, 9.0};
  const MonotoneCubic s(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(s.value(x[i]) == doctest::Approx(y[i]));
  const std::vector<double> yl{2.0, 4.0, 7.0, 10.0};
  const MonotoneCubic l(x, yl);
  CHECK(l.value(1.7) == doctest::Approx(2.0 + 2.0 * 1.7));
  CHECK(l.derivative(3.3) == doctest::Approx(2.0));
}

TEST_CASE("monotone data stay monotone") {
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  const std::vector<double> y{0, 0.1, 0.2, 5.0, 5.1, 5.2};
  const MonotoneCubic s(x, y);
  double prev = -1.0;
  for (double t = 0.0; t <= 5.0; t += 0.01) {
    const double v = s.value(t);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
}

TEST_CASE("smooth function accuracy") {
  std::vector<double> x, y;
  for (int i = 0; i <= 200; ++i) {
    x.push_back(0.01 * i);
    y.push_back(std::exp(-x.back()));
  }
  const MonotoneCubic s(x, y);
  CHECK(s.value(1.234) == doctest::Approx(std::exp(-1.234)).epsilon(1e-7));
  CHECK(s.derivative(1.234) == doctest::Approx(-std::exp(-1.234)).epsilon(1e-4));
}

TEST_CASE("bounds and bad input") {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> y{0.0, 1.0, 4.0};
  const MonotoneCubic s(x, y);
  CHECK_THROWS_AS(s.value(-0.1), BoundsError);
  CHECK_THROWS_AS(s.value(2.1), BoundsError);
  CHECK(s.contains(2.0));
  const std::vector<double> bad{0.0, 0.0, 1.0};
  CHECK_THROWS(MonotoneCubic(bad, y));
  const std::vector<double> one{1.0};
  CHECK_THROWS(MonotoneCubic(one, one));
}
