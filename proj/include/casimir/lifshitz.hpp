#pragma once

#include <optional>
#include <string>
#include <vector>

#include "casimir/materials.hpp"
#include "casimir/numeric/interpolation.hpp"

namespace casimir::lifshitz {

using materials::PermittivityModel;

// Sign convention used throughout the library: attractive forces are
// negative, and derivatives of sphere-plate forces are taken along the
// approach coordinate (decreasing gap). So F < 0, F' = 2 pi R P < 0 and
// F''' = 2 pi R d^2P/dz^2 < 0 for every Casimir curve; the odd orders equal
// -d^kF/dz^k in the gap coordinate z.

struct Reflection {
  double te;
  double tm;
};

/// Fresnel coefficients at imaginary frequency xi for in-plane wave number k.
Reflection reflection_coeffs(const PermittivityModel& model, double xi, double k);

struct LifshitzOptions {
  /// Stop the Matsubara sum once a term is below this fraction of the total.
  double matsubara_rel_tol = 1e-10;
  long max_matsubara_terms = 100000;
  double quadrature_rel_tol = 1e-10;
  /// Test hook: drop the TE polarization from the n = 0 term.
  bool include_static_te = true;
};

/// Plate-plate quantities at one separation: energy per area E (J/m^2),
/// pressure P = -dE/dz (Pa) and its first two derivatives in z.
struct PlatePlate {
  double energy = 0.0;
  double pressure = 0.0;
  double dpressure = 0.0;   // dP/dz, Pa/m
  double d2pressure = 0.0;  // d^2P/dz^2, Pa/m^2
  long matsubara_terms = 0;
  /// Relative size of the last Matsubara term kept (finite T) or the
  /// worst relative quadrature error estimate (T = 0 path).
  double residual = 0.0;
};

/// Finite-temperature Lifshitz sum.
PlatePlate plate_plate(const PermittivityModel& model, double z, double temperature,
                       const LifshitzOptions& opt = {});
/// Zero-temperature limit: the Matsubara sum replaced by a frequency integral.
PlatePlate plate_plate_zero_temperature(const PermittivityModel& model, double z,
                                        const LifshitzOptions& opt = {});

double plate_plate_energy(const PermittivityModel& model, double z, double temperature);
double plate_plate_energy(const PermittivityModel& model, double z);
/// order 0 -> P, 1 -> dP/dz, 2 -> d^2P/dz^2.
double plate_plate_pressure(const PermittivityModel& model, double z, double temperature,
                            int order);
double plate_plate_pressure(const PermittivityModel& model, double z, int order);

enum class Configuration { PlatePlate, SpherePlatePFA };

struct Geometry {
  double sphere_radius = 4e-3;  // m
  Configuration configuration = Configuration::SpherePlatePFA;
};

/// Proximity-force sphere-plate force. order 0 -> F = 2 pi R E,
/// 1 -> F' = 2 pi R P, 3 -> F''' = 2 pi R d^2P/dz^2; order 2 is also
/// accepted and returns F'' = -2 pi R dP/dz.
/// Throws DomainError when z/R > 0.1. `temperature` nullopt selects T = 0.
double sphere_plate_force(const PermittivityModel& model, double z,
                          std::optional<double> temperature, double radius, int order,
                          const LifshitzOptions& opt = {});

/// True when z/R exceeds the PFA warning threshold (1e-2).
bool pfa_warning(double z, double radius);

/// F'_a = F' + (A_rms^2 / 6) F'''.
double apparent_force_gradient(double f1, double f3, double a_rms);

/// Casimir sphere-plate curve sampled on a z grid.
struct ForceCurve {
  std::vector<double> z;      // m, strictly increasing
  std::vector<double> value;  // N
  std::vector<double> d1;     // N/m
  std::vector<double> d3;     // N/m^3
  std::string model;
  std::optional<double> temperature;  // nullopt = zero-temperature path
  Geometry geometry;

  std::size_t size() const { return z.size(); }
};

/// Evaluate a ForceCurve on `z` (sorted ascending internally). Grid points
/// are independent and are spread over `threads` workers (0 = auto).
ForceCurve compute_force_curve(const PermittivityModel& model, std::vector<double> z,
                               std::optional<double> temperature, const Geometry& geometry,
                               const LifshitzOptions& opt = {}, unsigned threads = 0);

/// Log-spaced grid of `n` points over [z_min, z_max].
std::vector<double> log_grid(double z_min, double z_max, std::size_t n);

/// Interpolating view of a ForceCurve. Each column is interpolated with a
/// monotone cubic on (ln z, ln|column|) when it keeps one sign, linearly
/// scaled values otherwise.
class CurveInterpolant {
 public:
  CurveInterpolant() = default;
  explicit CurveInterpolant(const ForceCurve& curve);

  double value(double z) const { return eval(value_, z); }
  double d1(double z) const { return eval(d1_, z); }
  double d3(double z) const { return eval(d3_, z); }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  bool covers(double z) const { return z >= z_min_ && z <= z_max_; }

 private:
  struct Column {
    numeric::MonotoneCubic spline;
    bool logarithmic = false;
    double sign = 1.0;
  };
  static Column make_column(const std::vector<double>& lnz, const std::vector<double>& y);
  double eval(const Column& c, double z) const;

  Column value_, d1_, d3_;
  double z_min_ = 0.0, z_max_ = 0.0;
};

unsigned default_thread_count();

}  // namespace casimir::lifshitz
