#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "casimir/error.hpp"

namespace casimir::numeric {

template <std::size_t N>
using Vec = std::array<double, N>;

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  std::size_t max_segments = 4000;
};

template <std::size_t N>
struct QuadratureResult {
  Vec<N> value{};
  Vec<N> error{};
  std::size_t evaluations = 0;
};

namespace detail {

// Kronrod 15-point abscissae with the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Segment {
  double a, b;
  Vec<N> value;
  Vec<N> error;
};

template <std::size_t N, class F>
Segment<N> gauss_kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Vec<N> fc = f(center);
  Vec<N> resk{}, resg{}, resabs{};
  Vec<N> fv1[7], fv2[7];
  for (std::size_t i = 0; i < N; ++i) {
    resk[i] = fc[i] * kWgk[7];
    resg[i] = fc[i] * kWg[3];
    resabs[i] = std::abs(resk[i]);
  }
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    for (std::size_t i = 0; i < N; ++i) {
      const double sum = fv1[j][i] + fv2[j][i];
      resk[i] += kWgk[j] * sum;
      resabs[i] += kWgk[j] * (std::abs(fv1[j][i]) + std::abs(fv2[j][i]));
      if (j % 2 == 1) resg[i] += kWg[j / 2] * sum;
    }
  }
  Segment<N> seg{a, b, {}, {}};
  for (std::size_t i = 0; i < N; ++i) {
    const double mean = 0.5 * resk[i];
    double asc = kWgk[7] * std::abs(fc[i] - mean);
    for (int j = 0; j < 7; ++j)
      asc += kWgk[j] * (std::abs(fv1[j][i] - mean) + std::abs(fv2[j][i] - mean));
    const double value = resk[i] * half;
    double err = std::abs((resk[i] - resg[i]) * half);
    asc *= std::abs(half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double absval = resabs[i] * std::abs(half);
    constexpr double kRound = 50.0 * std::numeric_limits<double>::epsilon();
    if (absval > std::numeric_limits<double>::min() / kRound) err = std::max(kRound * absval, err);
    seg.value[i] = value;
    seg.error[i] = err;
  }
  return seg;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of a vector-valued
/// integrand over a union of consecutive panels given by `breakpoints`.
/// Every component must satisfy err_i <= max(rel_tol*|I_i|, abs_tol).
template <std::size_t N, class F>
QuadratureResult<N> integrate(const F& f, std::span<const double> breakpoints,
                              const QuadratureOptions& opt = {}) {
  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");
  std::vector<detail::Segment<N>> segs;
  segs.reserve(breakpoints.size() + 64);
  std::size_t rules = 0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k, ++rules)
    segs.push_back(detail::gauss_kronrod15<N>(f, breakpoints[k], breakpoints[k + 1]));

  QuadratureResult<N> out;
  for (;;) {
    Vec<N> total{}, err{};
    for (const auto& s : segs)
      for (std::size_t i = 0; i < N; ++i) {
        total[i] += s.value[i];
        err[i] += s.error[i];
      }
    Vec<N> tol{};
    bool done = true;
    for (std::size_t i = 0; i < N; ++i) {
      tol[i] = std::max(opt.rel_tol * std::abs(total[i]), opt.abs_tol);
      if (err[i] > tol[i]) done = false;
    }
    if (done || segs.size() >= opt.max_segments) {
      out.value = total;
      out.error = err;
      out.evaluations = 15 * rules;
      if (!done) {
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i)
          worst = std::max(worst, err[i] / std::max(std::abs(total[i]), opt.abs_tol));
        throw NumericalError("adaptive quadrature did not converge", worst);
      }
      return out;
    }
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      double score = 0.0;
      for (std::size_t i = 0; i < N; ++i) score = std::max(score, segs[k].error[i] / tol[i]);
      if (score > best) {
        best = score;
        pick = k;
      }
    }
    const double a = segs[pick].a;
    const double b = segs[pick].b;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) {
      // Interval can no longer be split in double precision.
      double worst = 0.0;
      for (std::size_t i = 0; i < N; ++i)
        worst = std::max(worst, err[i] / std::max(std::abs(total[i]), opt.abs_tol));
      throw NumericalError("adaptive quadrature: interval underflow", worst);
    }
    segs[pick] = detail::gauss_kronrod15<N>(f, a, mid);
    segs.push_back(detail::gauss_kronrod15<N>(f, mid, b));
    rules += 2;
  }
}

template <std::size_t N, class F>
QuadratureResult<N> integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  const std::array<double, 2> bp{a, b};
  return integrate<N>(f, std::span<const double>(bp), opt);
}

}  // namespace casimir::numeric
