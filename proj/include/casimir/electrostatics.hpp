#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "casimir/numeric/interpolation.hpp"

namespace casimir::electrostatics {

/// Proximity-limit sphere-plate electrostatic force -pi eps0 R dV^2 / z
/// (attractive, negative). Throws DomainError for z <= 0 or z/R > 0.1.
double sphere_plate_electrostatic_force(double radius, double z, double dv);
/// Its approach-coordinate gradient, -pi eps0 R dV^2 / z^2.
double sphere_plate_electrostatic_gradient(double radius, double z, double dv);

/// K_p(z) = eps0 pi R f_m^2 / (k_eff (z - z_off)^2), in Hz^2/V^2.
double kp_model(double z, double radius, double f_m, double k_eff, double z_off);

/// Contact-potential profile V_m(z): a constant, or a monotone-cubic table.
class VmProfile {
 public:
  static VmProfile constant(double vm);
  static VmProfile table(std::vector<double> z, std::vector<double> vm);

  double value(double z) const;
  double derivative(double z) const;
  bool contains(double z) const;
  bool is_constant() const { return !spline_.has_value(); }
  /// Same profile shifted by a constant voltage.
  VmProfile shifted(double dv) const;

  const std::vector<double>& z() const;
  const std::vector<double>& vm() const;

 private:
  double constant_ = 0.0;
  double offset_ = 0.0;
  std::optional<numeric::MonotoneCubic> spline_;
};

struct ElectrostaticEnv {
  double radius = 4e-3;  // m
  double v1 = 0.0;       // V
  double vrms = 0.0;     // V
  VmProfile vm = VmProfile::constant(0.0);
};

/// Residual patch force -pi R eps0 [(V_m(z) + V1)^2 + Vrms^2] / z.
/// order 0 returns the force, order 1 its approach-coordinate gradient
/// pi R eps0 (S'(z)/z - S(z)/z^2) with S' from the interpolated V_m.
double residual_force(double z, const ElectrostaticEnv& env, int order = 0);

/// Surface-potential field on a regular lattice; cell (i, j) sits at
/// (i * spacing, j * spacing). Values are row-major with x fastest.
struct PatchMap {
  std::size_t nx = 0, ny = 0;
  double spacing = 0.0;             // m
  double correlation_length = 0.0;  // m
  double rms_amplitude = 0.0;       // V
  double mean_offset = 0.0;         // V
  std::uint64_t seed = 0;
  std::vector<double> values;       // V

  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  double& at(std::size_t i, std::size_t j) { return values[j * nx + i]; }
  double width() const { return spacing * static_cast<double>(nx - 1); }
  double height() const { return spacing * static_cast<double>(ny - 1); }
  double sample_mean() const;
  double sample_rms() const;  // about the sample mean
};

/// Gaussian random field with correlation exp(-r^2 / (2 l^2)), periodic
/// boundaries, rescaled so its sample mean and RMS equal `mean` and `rms`
/// exactly. Deterministic for a given seed.
PatchMap generate_patch_map(std::size_t nx, std::size_t ny, double spacing,
                            double correlation_length, double rms, double mean,
                            std::uint64_t seed);

/// Kernel-weighted average of `map` seen by a sphere at lateral position
/// (x, y) and gap z: weight 1 / (z + r^2 / (2R)) over the disk of radius
/// `footprint_radius`, normalized to unit mass. Throws BoundsError when the
/// disk leaves the map.
double vm_from_patches(const PatchMap& map, double x, double y, double z, double radius,
                       double footprint_radius);

inline constexpr double kDefaultFootprintRadius = 50e-6;

/// Estimate the correlation length of a map as the lag where the
/// x/y-averaged autocorrelation falls to exp(-1/2).
double estimate_correlation_length(const PatchMap& map);

}  // namespace casimir::electrostatics
