#include "casimir/lifshitz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "casimir/error.hpp"
#include "casimir/numeric/quadrature.hpp"

namespace casimir::lifshitz {

using materials::ModelKind;
namespace k = materials::constants;

namespace {

// Integration window above the lower limit y0 = 2 xi z / c; beyond y0 + 80
// the kernels are below e^-80 relative to their peak.
constexpr double kWindow = 80.0;

double susceptibility_xi2(const PermittivityModel& model, double xi) {
  const double wp = model.plasma_frequency();
  if (model.kind() == ModelKind::Drude) return wp * wp * xi / (xi + model.relaxation_rate());
  return wp * wp;
}

// Reflection in terms of kappa = sqrt(k^2 + xi^2/c^2). Written in forms free
// of cancellation when eps -> 1.
Reflection reflection_from_kappa(const PermittivityModel& model, double xi, double kappa) {
  if (model.kind() == ModelKind::PerfectConductor) return {-1.0, 1.0};
  if (xi == 0.0) {
    if (model.kind() == ModelKind::Drude) return {0.0, 1.0};
    const double wpc = model.plasma_frequency() / k::c;
    const double q = std::sqrt(kappa * kappa + wpc * wpc);
    const double sum = kappa + q;
    return {-(wpc * wpc) / (sum * sum), 1.0};
  }
  const double zeta = xi / k::c;
  const double chi_z2 = susceptibility_xi2(model, xi) / (k::c * k::c);  // (eps-1) xi^2/c^2
  const double kappa_m = std::sqrt(kappa * kappa + chi_z2);
  const double te_den = kappa + kappa_m;
  const double te = -chi_z2 / (te_den * te_den);
  const double eps_m1 = chi_z2 / (zeta * zeta);
  const double eps = 1.0 + eps_m1;
  const double k2 = std::max(0.0, (kappa - zeta) * (kappa + zeta));
  const double tm_den = eps * kappa + kappa_m;
  const double tm = eps_m1 * ((eps * kappa * kappa + k2) / tm_den) / tm_den;
  return {te, tm};
}

using Vec4 = numeric::Vec<4>;

// Accumulate the four y-kernels of one polarization with r^2 = r2.
inline void add_mode(double r2, double y, Vec4& acc) {
  if (r2 == 0.0) return;
  const double log_x = std::log(r2) - y;
  const double x = std::exp(log_x);
  const double one_minus_x = -std::expm1(log_x);
  const double q = x / one_minus_x;  // x/(1-x)
  const double y2 = y * y;
  acc[0] += y * std::log1p(-x);
  acc[1] += y2 * q;
  acc[2] += y2 * y * q / one_minus_x;
  acc[3] += y2 * y2 * q * (1.0 + x) / (one_minus_x * one_minus_x);
}

// y-integrals of one Matsubara frequency, unscaled:
//   I0 = int y ln(1-x), I1 = int y^2 x/(1-x), I2 = int y^3 x/(1-x)^2,
//   I3 = int y^4 x(1+x)/(1-x)^3,  with x = r^2 e^-y and y = 2 kappa z.
Vec4 frequency_integrals(const PermittivityModel& model, double xi, double z, bool include_te,
                         double rel_tol, double* rel_err) {
  const double y0 = 2.0 * xi * z / k::c;
  const double inv_2z = 0.5 / z;
  auto integrand = [&](double y) {
    Vec4 acc{};
    const Reflection r = reflection_from_kappa(model, xi, y * inv_2z);
    if (include_te) add_mode(r.te * r.te, y, acc);
    add_mode(r.tm * r.tm, y, acc);
    return acc;
  };
  const std::array<double, 6> bp{y0, y0 + 0.5, y0 + 2.0, y0 + 8.0, y0 + 24.0, y0 + kWindow};
  numeric::QuadratureOptions qo;
  qo.rel_tol = rel_tol;
  const auto res = numeric::integrate<4>(integrand, std::span<const double>(bp), qo);
  if (rel_err) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      if (res.value[i] != 0.0) worst = std::max(worst, res.error[i] / std::abs(res.value[i]));
    *rel_err = worst;
  }
  return res.value;
}

// Scale the y-integrals to k-space: E_n, P_n, P'_n, P''_n contributions
// before the thermal prefactor.
Vec4 to_kspace(const Vec4& I, double z) {
  const double z2 = z * z;
  const double z3 = z2 * z;
  return {I[0] / (4.0 * z2), I[1] / (8.0 * z3), I[2] / (8.0 * z3 * z), I[3] / (8.0 * z3 * z2)};
}

PlatePlate assemble(const Vec4& sum, double prefactor) {
  // prefactor stands for k_B T (finite T) or hbar/(2 pi) * integral-measure (T = 0).
  PlatePlate out;
  out.energy = prefactor / (2.0 * k::pi) * sum[0];
  out.pressure = -prefactor / k::pi * sum[1];
  out.dpressure = prefactor / k::pi * sum[2];
  out.d2pressure = -prefactor / k::pi * sum[3];
  return out;
}

void check_separation(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("separation z must be > 0");
}

}  // namespace

Reflection reflection_coeffs(const PermittivityModel& model, double xi, double kk) {
  if (!(xi >= 0.0)) throw DomainError("reflection_coeffs: xi must be >= 0");
  if (!(kk > 0.0)) throw DomainError("reflection_coeffs: k must be > 0");
  const double zeta = xi / k::c;
  return reflection_from_kappa(model, xi, std::sqrt(kk * kk + zeta * zeta));
}

PlatePlate plate_plate(const PermittivityModel& model, double z, double temperature,
                       const LifshitzOptions& opt) {
  check_separation(z);
  const materials::ThermalState thermal(temperature);
  Vec4 sum{};
  long n = 0;
  double last_rel = 0.0;
  for (;; ++n) {
    if (n >= opt.max_matsubara_terms) {
      std::ostringstream os;
      os << "Matsubara sum not converged after " << n << " terms (last relative term "
         << last_rel << ")";
      throw NumericalError(os.str(), last_rel);
    }
    const double xi = materials::matsubara_xi(n, thermal.temperature);
    const bool te = n > 0 || opt.include_static_te;
    Vec4 term = to_kspace(frequency_integrals(model, xi, z, te, opt.quadrature_rel_tol, nullptr), z);
    if (n == 0)
      for (double& t : term) t *= 0.5;
    for (int i = 0; i < 4; ++i) sum[i] += term[i];
    if (n == 0) continue;
    last_rel = 0.0;
    for (int i = 0; i < 4; ++i)
      if (sum[i] != 0.0) last_rel = std::max(last_rel, std::abs(term[i] / sum[i]));
    if (last_rel < opt.matsubara_rel_tol) break;
  }
  PlatePlate out = assemble(sum, k::k_B * thermal.temperature);
  out.matsubara_terms = n + 1;
  out.residual = last_rel;
  return out;
}

PlatePlate plate_plate_zero_temperature(const PermittivityModel& model, double z,
                                        const LifshitzOptions& opt) {
  check_separation(z);
  // xi = (c / 2z) t; the inner y-integral starts at y = t.
  const double xi_scale = k::c / (2.0 * z);
  const double inner_tol = opt.quadrature_rel_tol * 0.1;
  auto outer = [&](double t) {
    return to_kspace(frequency_integrals(model, xi_scale * t, z, true, inner_tol, nullptr), z);
  };
  const std::array<double, 11> bp{0.0, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 3.0, 10.0, 30.0, 100.0};
  numeric::QuadratureOptions qo;
  qo.rel_tol = opt.quadrature_rel_tol * 10.0;
  const auto res = numeric::integrate<4>(outer, std::span<const double>(bp), qo);
  // k_B T sum'_n -> (hbar / 2 pi) int d xi = (hbar / 2 pi) (c / 2z) int dt.
  PlatePlate out = assemble(res.value, k::hbar / (2.0 * k::pi) * xi_scale);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    if (res.value[i] != 0.0) worst = std::max(worst, res.error[i] / std::abs(res.value[i]));
  out.residual = worst;
  return out;
}

double plate_plate_energy(const PermittivityModel& model, double z, double temperature) {
  return plate_plate(model, z, temperature).energy;
}

double plate_plate_energy(const PermittivityModel& model, double z) {
  return plate_plate_zero_temperature(model, z).energy;
}

namespace {
double pick_pressure(const PlatePlate& pp, int order) {
  switch (order) {
    case 0:
      return pp.pressure;
    case 1:
      return pp.dpressure;
    case 2:
      return pp.d2pressure;
    default:
      throw DomainError("plate_plate_pressure: order must be 0, 1 or 2");
  }
}
}  // namespace

double plate_plate_pressure(const PermittivityModel& model, double z, double temperature,
                            int order) {
  if (order < 0 || order > 2) throw DomainError("plate_plate_pressure: order must be 0, 1 or 2");
  return pick_pressure(plate_plate(model, z, temperature), order);
}

double plate_plate_pressure(const PermittivityModel& model, double z, int order) {
  if (order < 0 || order > 2) throw DomainError("plate_plate_pressure: order must be 0, 1 or 2");
  return pick_pressure(plate_plate_zero_temperature(model, z), order);
}

bool pfa_warning(double z, double radius) { return z / radius > 1e-2; }

namespace {
void check_pfa(double z, double radius) {
  check_separation(z);
  if (!(radius > 0.0)) throw DomainError("sphere radius must be > 0");
  if (z / radius > 0.1) {
    std::ostringstream os;
    os << "proximity force approximation invalid: z/R = " << z / radius << " > 0.1";
    throw DomainError(os.str());
  }
}
}  // namespace

double sphere_plate_force(const PermittivityModel& model, double z,
                          std::optional<double> temperature, double radius, int order,
                          const LifshitzOptions& opt) {
  check_pfa(z, radius);
  if (order < 0 || order > 3) throw DomainError("sphere_plate_force: order must be 0..3");
  const PlatePlate pp = temperature ? plate_plate(model, z, *temperature, opt)
                                    : plate_plate_zero_temperature(model, z, opt);
  const double two_pi_r = 2.0 * k::pi * radius;
  switch (order) {
    case 0:
      return two_pi_r * pp.energy;
    case 1:
      return two_pi_r * pp.pressure;
    case 2:
      return -two_pi_r * pp.dpressure;
    default:
      return two_pi_r * pp.d2pressure;
  }
}

double apparent_force_gradient(double f1, double f3, double a_rms) {
  if (!(a_rms >= 0.0)) throw DomainError("apparent_force_gradient: A_rms must be >= 0");
  return f1 + a_rms * a_rms / 6.0 * f3;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("CASIMIR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ForceCurve compute_force_curve(const PermittivityModel& model, std::vector<double> z,
                               std::optional<double> temperature, const Geometry& geometry,
                               const LifshitzOptions& opt, unsigned threads) {
  std::sort(z.begin(), z.end());
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    if (!(z[i + 1] > z[i])) throw DomainError("force curve grid has duplicate separations");
  for (double zi : z) check_pfa(zi, geometry.sphere_radius);

  ForceCurve curve;
  curve.model = model.label();
  curve.temperature = temperature;
  curve.geometry = geometry;
  const std::size_t n = z.size();
  curve.value.resize(n);
  curve.d1.resize(n);
  curve.d3.resize(n);
  const double two_pi_r = 2.0 * k::pi * geometry.sphere_radius;
  const bool sphere = geometry.configuration == Configuration::SpherePlatePFA;
  const double scale = sphere ? two_pi_r : 1.0;

  auto work = [&](std::size_t i) {
    const PlatePlate pp = temperature ? plate_plate(model, z[i], *temperature, opt)
                                      : plate_plate_zero_temperature(model, z[i], opt);
    if (sphere) {
      curve.value[i] = scale * pp.energy;
      curve.d1[i] = scale * pp.pressure;
      curve.d3[i] = scale * pp.d2pressure;
    } else {
      // Plate-plate curves carry the energy per area and its derivatives
      // in the same approach-coordinate convention.
      curve.value[i] = pp.energy;
      curve.d1[i] = pp.pressure;
      curve.d3[i] = pp.d2pressure;
    }
  };

  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  curve.z = std::move(z);
  return curve;
}

std::vector<double> log_grid(double z_min, double z_max, std::size_t n) {
  if (!(z_min > 0.0) || !(z_max > z_min) || n < 2)
    throw DomainError("log_grid: need 0 < z_min < z_max and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(z_min), b = std::log(z_max);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = z_min;
  g.back() = z_max;
  return g;
}

CurveInterpolant::Column CurveInterpolant::make_column(const std::vector<double>& lnz,
                                                       const std::vector<double>& y) {
  Column c;
  const bool all_neg = std::all_of(y.begin(), y.end(), [](double v) { return v < 0.0; });
  const bool all_pos = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
  if (all_neg || all_pos) {
    c.logarithmic = true;
    c.sign = all_neg ? -1.0 : 1.0;
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(std::abs(y[i]));
    c.spline = numeric::MonotoneCubic(lnz, ly);
  } else {
    c.spline = numeric::MonotoneCubic(lnz, y);
  }
  return c;
}

CurveInterpolant::CurveInterpolant(const ForceCurve& curve) {
  if (curve.size() < 2) throw DomainError("CurveInterpolant: need at least two samples");
  std::vector<double> lnz(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) lnz[i] = std::log(curve.z[i]);
  value_ = make_column(lnz, curve.value);
  d1_ = make_column(lnz, curve.d1);
  d3_ = make_column(lnz, curve.d3);
  z_min_ = curve.z.front();
  z_max_ = curve.z.back();
}

double CurveInterpolant::eval(const Column& c, double z) const {
  if (!covers(z)) {
    std::ostringstream os;
    os << "separation " << z << " m outside Casimir curve range [" << z_min_ << ", " << z_max_
       << "]";
    throw BoundsError(os.str());
  }
  const double lz = std::clamp(std::log(z), c.spline.x_min(), c.spline.x_max());
  const double s = c.spline.value(lz);
  return c.logarithmic ? c.sign * std::exp(s) : s;
}

}  // namespace casimir::lifshitz
