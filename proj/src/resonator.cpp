#include "casimir/resonator.hpp"

#include <cmath>
#include <random>

#include "casimir/error.hpp"
#include "casimir/materials.hpp"

namespace casimir::resonator {

namespace k = materials::constants;

ResonatorParams::ResonatorParams(double f_m_, double k_eff_, double q_, double a_rms_,
                                 double drive_force_, double drive_omega_)
    : f_m(f_m_), k_eff(k_eff_), q(q_), a_rms(a_rms_), drive_force(drive_force_),
      drive_omega(drive_omega_) {
  if (!(f_m > 0.0)) throw ConfigError("resonator: f_m must be > 0");
  if (!(k_eff > 0.0)) throw ConfigError("resonator: k_eff must be > 0");
  if (!(q > 0.0)) throw ConfigError("resonator: Q must be > 0");
  if (!(a_rms >= 0.0)) throw ConfigError("resonator: A_rms must be >= 0");
}

double ResonatorParams::omega_m() const { return 2.0 * k::pi * f_m; }
double ResonatorParams::m_eff() const { return k_eff / (omega_m() * omega_m()); }
double ResonatorParams::gamma_mech() const { return k::pi * f_m / q; }

double freq_shift(double apparent_gradient, const ResonatorParams& p) {
  return -(p.f_m / (2.0 * p.k_eff)) * apparent_gradient;
}

bool perturbative_warning(double apparent_gradient, const ResonatorParams& p) {
  return std::abs(apparent_gradient) > 1e-2 * 2.0 * p.k_eff;
}

double equilibrium_shift(double force, const ResonatorParams& p) { return -force / p.k_eff; }

double distance_correction(double z_electrostatic, double a_rms) {
  if (!(z_electrostatic > 0.0)) throw DomainError("distance_correction: z must be > 0");
  return std::hypot(z_electrostatic, a_rms);
}

NoiseSpec::NoiseSpec(double sigma, double interval, std::uint64_t seed_)
    : sigma_y_1s(sigma), sample_interval(interval), seed(seed_) {
  if (!(sigma_y_1s >= 0.0)) throw ConfigError("noise: sigma_y must be >= 0");
  if (!(sample_interval > 0.0)) throw ConfigError("noise: sample interval must be > 0");
}

double NoiseSpec::per_sample_sigma() const { return sigma_y_1s * std::sqrt(1.0 / sample_interval); }

std::vector<double> simulate_frequency_series(double true_f, std::size_t n_samples,
                                              const NoiseSpec& spec) {
  if (n_samples < 2) throw DomainError("simulate_frequency_series: need at least 2 samples");
  std::vector<double> out(n_samples, true_f);
  const double s = spec.per_sample_sigma();
  if (s == 0.0) return out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& f : out) f = true_f * (1.0 + s * normal(rng));
  return out;
}

}  // namespace casimir::resonator
