#include "casimir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "casimir/error.hpp"
#include "casimir/materials.hpp"
#include "casimir/numeric/least_squares.hpp"

namespace casimir::analysis {

namespace k = materials::constants;

namespace {

ParabolaFitResult parabola_impl(std::span<const VoltagePoint> points, std::span<const double> sigma) {
  const std::size_t n = points.size();
  const bool weighted = !sigma.empty();
  if (weighted && sigma.size() != n) throw DomainError("fit_parabola: one sigma per point required");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("fit_parabola: sigma must be > 0");
  std::set<double> distinct;
  for (const auto& p : points) {
    if (!std::isfinite(p.v) || !std::isfinite(p.f)) throw DomainError("fit_parabola: non-finite point");
    distinct.insert(p.v);
  }
  if (distinct.size() < 3)
    throw DomainError("fit_parabola: rank-deficient, need at least 3 distinct voltages");

  double vbar = 0.0, fbar = 0.0, fmax = 0.0;
  for (const auto& p : points) {
    vbar += p.v;
    fbar += p.f;
    fmax = std::max(fmax, std::abs(p.f));
  }
  vbar /= static_cast<double>(n);
  fbar /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.v - vbar));

  // Fit (f - fbar)(f + fbar) so the large constant f^2 does not swamp the
  // curvature.
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (points[i].v - vbar) / scale;
    x(i, 0) = 1.0;
    x(i, 1) = u;
    x(i, 2) = u * u;
    y[i] = (points[i].f - fbar) * (points[i].f + fbar);
    if (weighted) {
      // sigma of f^2 is 2 f sigma_f
      const double w = 1.0 / (2.0 * std::abs(points[i].f) * sigma[i]);
      x.row(i) *= w;
      y[i] *= w;
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::Vector3d b = qr.solve(y);
  const Eigen::VectorXd r = y - x * b;
  const double rss = r.squaredNorm();

  double s2 = 0.0;
  const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() * fmax * fmax;
  if (weighted)
    s2 = 1.0;
  else if (n > 3 && rss > static_cast<double>(n) * roundoff * roundoff)
    s2 = rss / static_cast<double>(n - 3);
  const Eigen::Matrix3d xtx_inv = (x.transpose() * x).inverse();
  const Eigen::DiagonalMatrix<double, 3> d(1.0, 1.0 / scale, 1.0 / (scale * scale));
  const Eigen::Matrix3d cov_a = d * (s2 * xtx_inv) * d;

  const double a0 = b[0] + fbar * fbar;
  const double a1 = b[1] / scale;
  const double a2 = b[2] / (scale * scale);

  ParabolaFitResult res;
  res.n_points = n;
  res.kp = -a2;
  double fit_sq_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = points[i].v - vbar;
    const double f2 = a0 + a1 * u + a2 * u * u;
    const double fit = f2 > 0.0 ? std::sqrt(f2) : 0.0;
    fit_sq_sum += (points[i].f - fit) * (points[i].f - fit);
  }
  res.residual_rms = std::sqrt(fit_sq_sum / static_cast<double>(n));

  if (!(res.kp > 0.0)) {
    res.nonphysical_curvature = true;
    res.vm = std::numeric_limits<double>::quiet_NaN();
    res.f0 = a0 > 0.0 ? std::sqrt(a0) : std::numeric_limits<double>::quiet_NaN();
    res.covariance(1, 1) = cov_a(2, 2);
    return res;
  }
  const double kp = res.kp;
  res.vm = vbar + a1 / (2.0 * kp);
  const double f0sq = a0 + a1 * a1 / (4.0 * kp);
  res.f0 = std::sqrt(f0sq);

  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  const double inv2f0 = 0.5 / res.f0;
  j(0, 0) = inv2f0;
  j(0, 1) = inv2f0 * a1 / (2.0 * kp);
  j(0, 2) = inv2f0 * a1 * a1 / (4.0 * kp * kp);
  j(1, 2) = -1.0;
  j(2, 1) = 1.0 / (2.0 * kp);
  j(2, 2) = a1 / (2.0 * kp * kp);
  res.covariance = j * cov_a * j.transpose();
  return res;
}

}  // namespace

ParabolaFitResult fit_parabola(std::span<const VoltagePoint> points) { return parabola_impl(points, {}); }

ParabolaFitResult fit_parabola(std::span<const VoltagePoint> points, std::span<const double> sigma) {
  return parabola_impl(points, sigma);
}

std::vector<double> replicate_sigmas(std::span<const VoltagePoint> points) {
  std::map<double, std::vector<double>> by_v;
  for (const auto& p : points) by_v[p.v].push_back(p.f);
  std::map<double, double> sd;
  for (const auto& [v, fs] : by_v) {
    if (fs.size() < 2) return {};
    double m = 0.0;
    for (double f : fs) m += f;
    m /= static_cast<double>(fs.size());
    double ss = 0.0;
    for (double f : fs) ss += (f - m) * (f - m);
    const double s = std::sqrt(ss / static_cast<double>(fs.size() - 1));
    if (!(s > 0.0)) return {};
    sd[v] = s;
  }
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sd[p.v]);
  return out;
}

CalibrationResult calibrate_kp(std::span<const KpSample> samples, double radius, double f_m) {
  const std::size_t n = samples.size();
  std::set<double> zs;
  std::size_t weighted = 0;
  for (const auto& s : samples) {
    if (!(s.kp > 0.0) || !std::isfinite(s.z)) throw DomainError("calibrate_kp: K_p samples must be > 0");
    zs.insert(s.z);
    if (s.sigma > 0.0) ++weighted;
  }
  if (zs.size() < 3) throw InsufficientDataError("calibrate_kp: need at least 3 distinct setpoints");
  if (weighted != 0 && weighted != n)
    throw DomainError("calibrate_kp: either every sample or none must carry a sigma");
  if (!(radius > 0.0) || !(f_m > 0.0)) throw DomainError("calibrate_kp: R and f_m must be > 0");
  const bool relative = weighted == 0;
  auto sigma_of = [&](const KpSample& s) { return relative ? s.kp : s.sigma; };
  const double c = k::epsilon_0 * k::pi * radius * f_m * f_m;

  // 1/sqrt(K_p) = sqrt(k_eff / c) (z - z_off)
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const auto& s : samples) {
    const double yv = 1.0 / std::sqrt(s.kp);
    const double sy = 0.5 * sigma_of(s) / (s.kp * std::sqrt(s.kp));
    const double w = 1.0 / (sy * sy);
    sw += w;
    swx += w * s.z;
    swy += w * yv;
    swxx += w * s.z * s.z;
    swxy += w * s.z * yv;
  }
  const double det = sw * swxx - swx * swx;
  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swxx * swy - swx * swxy) / det;
  if (!(slope > 0.0)) throw NumericalError("calibrate_kp: 1/sqrt(K_p) does not grow with z");
  const double k0 = slope * slope * c;
  const double zscale = *zs.begin();
  const double zoff_line = -intercept / slope;
  const double z_second = *std::next(zs.begin());
  // An extrapolated contact at or beyond the closest setpoint cannot seed the
  // fit; start just inside it instead.
  const double zoff0 = std::min(zoff_line, zscale - 0.1 * (z_second - zscale));

  const numeric::ResidualFn residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    const double ke = p[0] * k0, zo = p[1] * zscale;
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = samples[i].z - zo;
      r[i] = (gap > 0.0 && ke > 0.0) ? (c / (ke * gap * gap) - samples[i].kp) / sigma_of(samples[i])
                                     : 1e100;
    }
    return r;
  };
  const numeric::JacobianFn jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd jm(n, 2);
    const double ke = p[0] * k0, zo = p[1] * zscale;
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = samples[i].z - zo;
      const double m = c / (ke * gap * gap);
      const double s = sigma_of(samples[i]);
      jm(i, 0) = -m / ke * k0 / s;
      jm(i, 1) = 2.0 * m / gap * zscale / s;
    }
    return jm;
  };
  numeric::LeastSquaresOptions opt;
  opt.typical_scale = Eigen::Vector2d(1.0, 1e-3);
  const auto fit =
      numeric::levenberg_marquardt(residual, Eigen::Vector2d(1.0, zoff0 / zscale), opt, jacobian);
  if (!fit.converged)
    throw NumericalError("calibrate_kp: no convergence\n" + numeric::format_trace(fit.trace),
                         fit.objective);

  CalibrationResult res;
  res.n_points = n;
  res.iterations = fit.iterations;
  res.k_eff = fit.params[0] * k0;
  res.z_off = fit.params[1] * zscale;
  res.chi2_red = fit.objective / static_cast<double>(n - 2);
  const double var_scale = relative ? res.chi2_red : 1.0;
  res.k_eff_sigma = std::sqrt(fit.covariance(0, 0) * var_scale) * k0;
  res.z_off_sigma = std::sqrt(fit.covariance(1, 1) * var_scale) * zscale;
  res.contact_warning = zoff_line >= zscale || res.z_off >= zscale;
  if (!(res.k_eff > 0.0)) throw NumericalError("calibrate_kp: fitted k_eff is not positive");
  return res;
}

std::vector<AllanPoint> allan_deviation(std::span<const double> series, double sample_interval,
                                        std::span<const double> taus) {
  if (!(sample_interval > 0.0)) throw DomainError("allan_deviation: sample interval must be > 0");
  const std::size_t n = series.size();
  const double max_tau = static_cast<double>(n / 2) * sample_interval;
  if (n < 2) {
    throw InsufficientDataError("allan_deviation: need at least 2 samples (have " +
                                std::to_string(n) + ")");
  }
  double mean = 0.0;
  for (double f : series) mean += f;
  mean /= static_cast<double>(n);
  if (!(mean != 0.0) || !std::isfinite(mean)) throw DomainError("allan_deviation: mean frequency must be nonzero");

  std::vector<AllanPoint> out;
  for (double tau : taus) {
    const double mf = tau / sample_interval;
    const auto m = static_cast<std::size_t>(std::llround(mf));
    if (m < 1 || std::abs(mf - static_cast<double>(m)) > 1e-6 * mf)
      throw DomainError("allan_deviation: tau must be a whole multiple of the sample interval");
    const std::size_t blocks = n / m;
    if (blocks < 2) {
      std::ostringstream os;
      os << "allan_deviation: tau = " << tau << " s needs " << 2 * m << " samples, have " << n
         << "; maximum valid tau is " << max_tau << " s";
      throw InsufficientDataError(os.str());
    }
    std::vector<double> ybar(blocks, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += series[b * m + i] / mean - 1.0;
      ybar[b] = acc / static_cast<double>(m);
    }
    double acc = 0.0;
    for (std::size_t b = 0; b + 1 < blocks; ++b) acc += (ybar[b + 1] - ybar[b]) * (ybar[b + 1] - ybar[b]);
    const double avar = 0.5 * acc / static_cast<double>(blocks - 1);
    out.push_back({static_cast<double>(m) * sample_interval, std::sqrt(avar), blocks});
  }
  return out;
}

std::vector<double> octave_taus(std::size_t n_samples, double sample_interval) {
  std::vector<double> t;
  for (std::size_t m = 1; 2 * m <= n_samples; m *= 2) t.push_back(static_cast<double>(m) * sample_interval);
  return t;
}

double loglog_slope(std::span<const AllanPoint> table) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& p : table) {
    if (!(p.sigma_y > 0.0)) continue;
    const double x = std::log(p.tau), y = std::log(p.sigma_y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw InsufficientDataError("loglog_slope: need two nonzero points");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("regularized_gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int i = 0; i < 10000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) return 1.0 - sum * std::exp(log_prefactor);
    }
    throw NumericalError("regularized_gamma_q: series did not converge");
  }
  const double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return std::exp(log_prefactor) * h;
  }
  throw NumericalError("regularized_gamma_q: continued fraction did not converge");
}

double chi2_probability_to_exceed(double chi2, int dof) {
  if (dof < 1) throw DomainError("chi2_probability_to_exceed: dof must be >= 1");
  if (!(chi2 >= 0.0)) throw DomainError("chi2_probability_to_exceed: chi2 must be >= 0");
  return std::clamp(regularized_gamma_q(0.5 * dof, 0.5 * chi2), 0.0, 1.0);
}

electrostatics::VmProfile smooth_vm_profile(std::span<const VmSample> samples, int degree,
                                            std::size_t grid_points) {
  if (samples.empty()) throw InsufficientDataError("smooth_vm_profile: no samples");
  if (degree < 0) throw DomainError("smooth_vm_profile: degree must be >= 0");
  std::size_t weighted = 0;
  double zmin = samples[0].z, zmax = samples[0].z, lsum = 0.0;
  for (const auto& s : samples) {
    if (!(s.z > 0.0) || !std::isfinite(s.vm)) throw DomainError("smooth_vm_profile: invalid sample");
    if (s.sigma > 0.0) ++weighted;
    zmin = std::min(zmin, s.z);
    zmax = std::max(zmax, s.z);
    lsum += std::log(s.z);
  }
  const std::size_t n = samples.size();
  if (weighted != 0 && weighted != n)
    throw DomainError("smooth_vm_profile: either every sample or none must carry a sigma");
  const double lref = lsum / static_cast<double>(n);
  std::set<double> distinct;
  for (const auto& v : samples) distinct.insert(v.z);
  const int deg = std::min(degree, static_cast<int>(distinct.size()) - 1);
  Eigen::MatrixXd x(n, deg + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / samples[i].sigma : 1.0;
    const double t = std::log(samples[i].z) - lref;
    double tp = 1.0;
    for (int p = 0; p <= deg; ++p) {
      x(i, p) = w * tp;
      tp *= t;
    }
    y[i] = w * samples[i].vm;
  }
  const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(y);
  auto poly = [&](double z) {
    const double t = std::log(z) - lref;
    double acc = 0.0;
    for (int p = deg; p >= 0; --p) acc = acc * t + coef[p];
    return acc;
  };
  if (deg == 0 || zmin == zmax) return electrostatics::VmProfile::constant(poly(zmin));
  const auto grid = lifshitz::log_grid(zmin, zmax, std::max<std::size_t>(grid_points, 4));
  std::vector<double> vm(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vm[i] = poly(grid[i]);
  return electrostatics::VmProfile::table(grid, vm);
}

namespace {

struct ModelTerms {
  // f0_model = base + v1 * h1 + (v1^2 + vrms^2) * h2
  Eigen::VectorXd base, h1, h2, sigma;
};

ModelTerms model_terms(std::span<const ShiftPoint> data, const electrostatics::VmProfile& vm,
                       const resonator::ResonatorParams& res, const lifshitz::Geometry& geometry,
                       const lifshitz::CurveInterpolant& curve, bool unit_weights) {
  const std::size_t n = data.size();
  ModelTerms t{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double pre = k::pi * geometry.sphere_radius * k::epsilon_0;
  const double to_hz = -res.f_m / (2.0 * res.k_eff);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = data[i].z;
    if (!curve.covers(z)) {
      std::ostringstream os;
      os << "fit_residual_potential: z = " << z << " m outside the Casimir curve range ["
         << curve.z_min() << ", " << curve.z_max() << "]";
      throw BoundsError(os.str());
    }
    if (z / geometry.sphere_radius > 0.1)
      throw DomainError("fit_residual_potential: proximity limit invalid");
    const double vmz = vm.value(z), dvm = vm.derivative(z);
    const double cas = lifshitz::apparent_force_gradient(curve.d1(z), curve.d3(z), res.a_rms);
    const double g0 = pre * (2.0 * vmz * dvm / z - vmz * vmz / (z * z));
    const double g1 = pre * (2.0 * dvm / z - 2.0 * vmz / (z * z));
    const double g2 = -pre / (z * z);
    t.base[i] = res.f_m + to_hz * (cas + g0);
    t.h1[i] = to_hz * g1;
    t.h2[i] = to_hz * g2;
    t.sigma[i] = unit_weights ? 1.0 : data[i].sigma;
  }
  return t;
}

}  // namespace

ModelFitReport fit_residual_potential(std::span<const ShiftPoint> data,
                                      const electrostatics::VmProfile& vm,
                                      const resonator::ResonatorParams& resonator,
                                      const lifshitz::Geometry& geometry,
                                      const lifshitz::ForceCurve& casimir_curve,
                                      std::string model_tag) {
  const std::size_t n = data.size();
  if (n < 3) throw InsufficientDataError("fit_residual_potential: need at least 3 distances");
  std::size_t weighted = 0;
  for (const auto& d : data) {
    if (!std::isfinite(d.f0) || !std::isfinite(d.sigma) || d.sigma < 0.0)
      throw DomainError("fit_residual_potential: invalid data point");
    if (d.sigma > 0.0) ++weighted;
  }
  if (weighted != 0 && weighted != n)
    throw DomainError("fit_residual_potential: either every point or none must carry a sigma");

  ModelFitReport rep;
  rep.model = std::move(model_tag);
  rep.unit_weights = weighted == 0;
  const lifshitz::CurveInterpolant curve(casimir_curve);
  const ModelTerms t = model_terms(data, vm, resonator, geometry, curve, rep.unit_weights);
  Eigen::VectorXd f0(n);
  for (std::size_t i = 0; i < n; ++i) f0[i] = data[i].f0;

  // Linear in (a, b) = (V1, V1^2 + Vrms^2).
  Eigen::MatrixXd a(n, 2);
  a.col(0) = t.h1.cwiseQuotient(t.sigma);
  a.col(1) = t.h2.cwiseQuotient(t.sigma);
  const Eigen::VectorXd rhs = (f0 - t.base).cwiseQuotient(t.sigma);
  const Eigen::Vector2d lin = a.colPivHouseholderQr().solve(rhs);
  const Eigen::Matrix2d lin_cov =
      (a.transpose() * a).completeOrthogonalDecomposition().pseudoInverse();
  const double vrms2 = lin[1] - lin[0] * lin[0];
  rep.vrms_at_boundary = !(vrms2 > 0.0);

  numeric::LeastSquaresOptions opt;
  opt.typical_scale = Eigen::VectorXd::Constant(rep.vrms_at_boundary ? 1 : 2, 1e-6);
  numeric::LeastSquaresResult fit;
  if (!rep.vrms_at_boundary) {
    const numeric::ResidualFn r = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      const double s = p[0] * p[0] + p[1] * p[1];
      return (f0 - t.base - p[0] * t.h1 - s * t.h2).cwiseQuotient(t.sigma);
    };
    const numeric::JacobianFn jac = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
      Eigen::MatrixXd j(n, 2);
      j.col(0) = -(t.h1 + 2.0 * p[0] * t.h2).cwiseQuotient(t.sigma);
      j.col(1) = -(2.0 * p[1] * t.h2).cwiseQuotient(t.sigma);
      return j;
    };
    fit = numeric::levenberg_marquardt(r, Eigen::Vector2d(lin[0], std::sqrt(vrms2)), opt, jac);
  } else {
    const numeric::ResidualFn r = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      return (f0 - t.base - p[0] * t.h1 - p[0] * p[0] * t.h2).cwiseQuotient(t.sigma);
    };
    const numeric::JacobianFn jac = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
      Eigen::MatrixXd j(n, 1);
      j.col(0) = -(t.h1 + 2.0 * p[0] * t.h2).cwiseQuotient(t.sigma);
      return j;
    };
    Eigen::VectorXd start(1);
    start[0] = lin[0];
    fit = numeric::levenberg_marquardt(r, start, opt, jac);
  }
  if (!fit.converged)
    throw NumericalError("fit_residual_potential: no convergence for model '" + rep.model + "'\n" +
                             numeric::format_trace(fit.trace),
                         fit.objective);

  rep.iterations = fit.iterations;
  rep.chi2 = fit.objective;
  rep.dof = static_cast<int>(n) - 2;
  if (rep.dof < 1) throw InsufficientDataError("fit_residual_potential: no degrees of freedom left");
  rep.chi2_red = rep.chi2 / rep.dof;
  rep.probability_to_exceed = chi2_probability_to_exceed(rep.chi2, rep.dof);
  const double var_scale = rep.unit_weights ? rep.chi2_red : 1.0;
  rep.v1 = fit.params[0];
  rep.v1_sigma = std::sqrt(fit.covariance(0, 0) * var_scale);
  if (!rep.vrms_at_boundary) {
    rep.vrms = std::abs(fit.params[1]);
    rep.vrms_sigma = std::sqrt(fit.covariance(1, 1) * var_scale);
  } else {
    rep.vrms = 0.0;
    rep.vrms_sigma = std::sqrt(std::sqrt(lin_cov(1, 1) * var_scale));
  }
  const double s = rep.v1 * rep.v1 + rep.vrms * rep.vrms;
  rep.residuals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double model = t.base[i] + rep.v1 * t.h1[i] + s * t.h2[i];
    rep.residuals.push_back({data[i].z, data[i].f0, model, data[i].f0 - model, data[i].sigma});
  }
  return rep;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

ModelComparison compare_models(std::span<const ShiftPoint> data,
                               const electrostatics::VmProfile& vm,
                               const resonator::ResonatorParams& resonator,
                               const lifshitz::Geometry& geometry,
                               std::span<const Candidate> candidates) {
  if (candidates.size() < 2) throw ConfigError("compare_models: need at least 2 candidate models");
  ModelComparison out;
  for (const auto& c : candidates) {
    try {
      out.ranked.push_back(fit_residual_potential(data, vm, resonator, geometry, *c.curve, c.name));
    } catch (const Error& e) {
      ModelFitReport failed;
      failed.model = c.name;
      failed.error = e.what();
      failed.error_exit_code = e.exit_code();
      out.ranked.push_back(std::move(failed));
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const ModelFitReport& a, const ModelFitReport& b) {
                     if (a.ok() != b.ok()) return a.ok();
                     if (!a.ok()) return false;
                     if (a.probability_to_exceed != b.probability_to_exceed)
                       return a.probability_to_exceed > b.probability_to_exceed;
                     return a.chi2 < b.chi2;
                   });
  const auto& best = out.ranked.front();
  if (!best.ok()) {
    out.verdict = "no model could be fitted";
    return out;
  }
  std::string v = best.model + " preferred (chi2_red = " + fmt("%.3f", best.chi2_red) +
                  ", PTE = " + fmt("%.3g", best.probability_to_exceed) + ")";
  for (std::size_t i = 1; i < out.ranked.size(); ++i) {
    const auto& r = out.ranked[i];
    if (!r.ok()) {
      v += "; " + r.model + " fit failed";
      continue;
    }
    v += "; " + r.model + " rejected at " + fmt("%.4g", 100.0 * (1.0 - r.probability_to_exceed)) +
         "% confidence (chi2_red = " + fmt("%.3f", r.chi2_red) + ")";
  }
  out.verdict = v;
  return out;
}

int auto_vm_degree(std::span<const VmSample> samples, int max_degree) {
  const bool weighted = std::all_of(samples.begin(), samples.end(),
                                    [](const VmSample& s) { return s.sigma > 0.0; });
  const auto n = static_cast<int>(samples.size());
  if (!weighted) return std::min(2, n - 1);
  double lref = 0.0;
  for (const auto& s : samples) lref += std::log(s.z);
  lref /= n;
  for (int deg = 1; deg <= max_degree && deg < n - 1; ++deg) {
    Eigen::MatrixXd x(n, deg + 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double t = std::log(samples[i].z) - lref;
      double tp = 1.0;
      for (int p = 0; p <= deg; ++p) {
        x(i, p) = tp / samples[i].sigma;
        tp *= t;
      }
      y[i] = samples[i].vm / samples[i].sigma;
    }
    const Eigen::VectorXd c = x.colPivHouseholderQr().solve(y);
    const double dof = n - deg - 1;
    if ((y - x * c).squaredNorm() / dof <= 1.0 + 3.0 * std::sqrt(2.0 / dof)) return deg;
  }
  return std::min(max_degree, n - 1);
}

AnalysisResult analyze(std::span<const simulator::SweepRecord> records, const AnalysisConfig& cfg,
                       std::span<const lifshitz::ForceCurve> curves) {
  if (records.empty()) throw InsufficientDataError("analyze: no sweep records");
  if (cfg.candidates.size() < 2) throw ConfigError("analyze: need at least 2 candidate models");
  std::map<double, std::vector<VoltagePoint>, std::greater<>> groups;
  for (const auto& r : records) groups[r.z_setpoint].push_back({r.applied_v, r.measured_f});

  AnalysisResult out;
  std::vector<KpSample> kp;
  for (auto& [z, pts] : groups) {
    SetpointSummary s{};
    s.z_setpoint = z;
    const auto sig = replicate_sigmas(pts);
    s.parabola = sig.empty() ? fit_parabola(pts) : fit_parabola(pts, sig);
    if (s.parabola.nonphysical_curvature) {
      std::ostringstream os;
      os << "setpoint " << z << " m: non-physical curvature K_p = " << s.parabola.kp << ", skipped";
      out.warnings.push_back(os.str());
      continue;
    }
    out.setpoints.push_back(s);
  }
  if (out.setpoints.size() < 3)
    throw InsufficientDataError("analyze: fewer than 3 setpoints with a physical parabola");

  bool all_sigma = true;
  for (const auto& s : out.setpoints) all_sigma = all_sigma && s.parabola.kp_sigma() > 0.0;
  for (const auto& s : out.setpoints)
    kp.push_back({s.z_setpoint, s.parabola.kp, all_sigma ? s.parabola.kp_sigma() : 0.0});
  out.calibration = calibrate_kp(kp, cfg.geometry.sphere_radius, cfg.resonator.f_m);
  if (out.calibration.contact_warning)
    out.warnings.push_back("calibration: z_off lies at or beyond the closest setpoint");

  std::vector<VmSample> vms;
  bool vm_sigma = true;
  for (auto& s : out.setpoints) {
    s.z_electrostatic = s.z_setpoint - out.calibration.z_off;
    if (!(s.z_electrostatic > 0.0))
      throw NumericalError("analyze: calibrated z_off places a setpoint in contact");
    s.z_physical = resonator::distance_correction(s.z_electrostatic, cfg.resonator.a_rms);
    vm_sigma = vm_sigma && s.parabola.vm_sigma() > 0.0;
  }
  for (const auto& s : out.setpoints)
    vms.push_back({s.z_physical, s.parabola.vm, vm_sigma ? s.parabola.vm_sigma() : 0.0});
  out.vm = smooth_vm_profile(vms, cfg.vm_smoothing_degree > 0 ? cfg.vm_smoothing_degree
                                                               : auto_vm_degree(vms));

  bool f0_sigma = true;
  for (const auto& s : out.setpoints) f0_sigma = f0_sigma && s.parabola.f0_sigma() > 0.0;
  for (auto it = out.setpoints.rbegin(); it != out.setpoints.rend(); ++it) {
    const double sigma = cfg.sigma_override ? *cfg.sigma_override
                         : f0_sigma         ? it->parabola.f0_sigma()
                                            : 0.0;
    out.shifts.push_back({it->z_physical, it->parabola.f0, sigma});
  }

  const double zlo = out.shifts.front().z, zhi = out.shifts.back().z;
  std::vector<lifshitz::ForceCurve> computed;
  computed.reserve(cfg.candidates.size());
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < cfg.candidates.size(); ++i) {
    if (i < curves.size()) {
      cands.push_back({cfg.candidates[i].first, &curves[i]});
      continue;
    }
    const double a = zlo * 0.995, b = zhi * 1.005;
    const auto npts = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::ceil(std::log10(b / a) * simulator::kCurvePointsPerDecade)) + 2);
    computed.push_back(lifshitz::compute_force_curve(cfg.candidates[i].second,
                                                     lifshitz::log_grid(a, b, npts), cfg.temperature,
                                                     cfg.geometry));
    cands.push_back({cfg.candidates[i].first, &computed.back()});
  }
  const resonator::ResonatorParams fitted(cfg.resonator.f_m, out.calibration.k_eff, cfg.resonator.q,
                                          cfg.resonator.a_rms);
  out.comparison = compare_models(out.shifts, out.vm, fitted, cfg.geometry, cands);
  return out;
}

AnalysisConfig analysis_config_from(const simulator::ExperimentConfig& cfg) {
  AnalysisConfig a;
  a.geometry = cfg.geometry;
  a.temperature = cfg.temperature;
  a.resonator = cfg.resonator;
  a.candidates = cfg.candidate_models;
  if (a.candidates.empty())
    a.candidates = {{"drude", materials::PermittivityModel::gold_drude()},
                    {"plasma", materials::PermittivityModel::gold_plasma()}};
  return a;
}

}  // namespace casimir::analysis
