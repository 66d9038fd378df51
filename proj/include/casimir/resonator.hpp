#pragma once

#include <cstdint>
#include <vector>

namespace casimir::resonator {

/// Membrane parameters. f_m defaults to 100 kHz when a configuration does
/// not provide one; every other field must be given explicitly.
struct ResonatorParams {
  ResonatorParams(double f_m, double k_eff, double q, double a_rms, double drive_force = 0.0,
                  double drive_omega = 0.0);

  double f_m;    // Hz
  double k_eff;  // N/m
  double q;
  double a_rms;  // m
  double drive_force;  // N, equation-of-motion metadata only
  double drive_omega;  // rad/s

  double omega_m() const;
  double m_eff() const;      // k_eff / omega_m^2
  double gamma_mech() const; // pi f_m / Q
};

inline constexpr double kDefaultFm = 1e5;

/// Delta f = -(f_m / 2 k_eff) F'_a. Use `perturbative_warning` to check
/// |F'_a| against 2 k_eff.
double freq_shift(double apparent_gradient, const ResonatorParams& p);
bool perturbative_warning(double apparent_gradient, const ResonatorParams& p);

/// Static deflection -F / k_eff produced by a force at the working point
/// (diagnostic only; it does not enter the frequency model).
double equilibrium_shift(double force, const ResonatorParams& p);

/// z sqrt(1 + (A_rms / z)^2).
double distance_correction(double z_electrostatic, double a_rms);

struct NoiseSpec {
  NoiseSpec(double sigma_y_1s, double sample_interval, std::uint64_t seed);
  double sigma_y_1s;       // Allan deviation at 1 s (white FM)
  double sample_interval;  // s
  std::uint64_t seed;

  /// Fractional standard deviation of one sample averaged over sample_interval.
  double per_sample_sigma() const;
};

/// White-FM series f_k = f (1 + sigma_y(1 s) sqrt(1 s / tau0) g_k).
std::vector<double> simulate_frequency_series(double true_f, std::size_t n_samples,
                                              const NoiseSpec& spec);

}  // namespace casimir::resonator
