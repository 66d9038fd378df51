#pragma once

#include <string>
#include <string_view>

namespace casimir::materials {

/// CODATA-2018 values, SI units. Every computation in the library is
/// carried out in SI; electron-volt inputs go through `ev_to_radpersec`.
namespace constants {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double c = 299792458.0;                 // m / s
inline constexpr double k_B = 1.380649e-23;              // J / K
inline constexpr double epsilon_0 = 8.8541878128e-12;    // F / m
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

enum class ModelKind { Drude, Plasma, PerfectConductor };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Free-electron permittivity model evaluated on the imaginary axis.
class PermittivityModel {
 public:
  static PermittivityModel drude(double plasma_frequency, double relaxation_rate);
  static PermittivityModel plasma(double plasma_frequency);
  static PermittivityModel perfect_conductor();

  /// Gold, omega_p = 7.54 eV and gamma = 0.051 eV.
  static PermittivityModel gold_drude();
  static PermittivityModel gold_plasma();

  ModelKind kind() const noexcept { return kind_; }
  double plasma_frequency() const noexcept { return omega_p_; }  // rad/s
  double relaxation_rate() const noexcept { return gamma_; }     // rad/s

  std::string label() const;

  bool operator==(const PermittivityModel&) const = default;

 private:
  PermittivityModel(ModelKind kind, double omega_p, double gamma)
      : kind_(kind), omega_p_(omega_p), gamma_(gamma) {}

  ModelKind kind_;
  double omega_p_;
  double gamma_;
};

struct ThermalState {
  explicit ThermalState(double temperature_k);
  double temperature;  // K
};

/// eps(i xi). PerfectConductor returns +infinity.
/// Throws DomainError for xi < 0 and for the plasma model at xi == 0, whose
/// static limit is handled analytically by the reflection coefficients.
double eps_imag(const PermittivityModel& model, double xi);

/// eps(i xi) * xi^2, finite for every model at every xi >= 0 except the
/// perfect conductor. This is the combination the reflection coefficients
/// need, and it stays well conditioned as xi -> 0.
double eps_times_xi2(const PermittivityModel& model, double xi);

/// n-th Matsubara frequency 2 pi n k_B T / hbar.
double matsubara_xi(long n, double temperature);

double ev_to_radpersec(double energy_ev);

}  // namespace casimir::materials
