#include "casimir/materials.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "casimir/error.hpp"

namespace casimir::materials {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Drude:
      return "drude";
    case ModelKind::Plasma:
      return "plasma";
    case ModelKind::PerfectConductor:
      return "perfect_conductor";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "drude") return ModelKind::Drude;
  if (name == "plasma") return ModelKind::Plasma;
  if (name == "perfect_conductor" || name == "ideal") return ModelKind::PerfectConductor;
  throw ConfigError("unknown permittivity model kind '" + std::string(name) + "'");
}

PermittivityModel PermittivityModel::drude(double plasma_frequency, double relaxation_rate) {
  if (!(plasma_frequency > 0.0) || !std::isfinite(plasma_frequency))
    throw DomainError("Drude model requires omega_p > 0");
  if (!(relaxation_rate > 0.0) || !std::isfinite(relaxation_rate))
    throw DomainError("Drude model requires gamma > 0");
  return {ModelKind::Drude, plasma_frequency, relaxation_rate};
}

PermittivityModel PermittivityModel::plasma(double plasma_frequency) {
  if (!(plasma_frequency > 0.0) || !std::isfinite(plasma_frequency))
    throw DomainError("plasma model requires omega_p > 0");
  return {ModelKind::Plasma, plasma_frequency, 0.0};
}

PermittivityModel PermittivityModel::perfect_conductor() {
  return {ModelKind::PerfectConductor, 0.0, 0.0};
}

PermittivityModel PermittivityModel::gold_drude() {
  return drude(ev_to_radpersec(7.54), ev_to_radpersec(0.051));
}

PermittivityModel PermittivityModel::gold_plasma() { return plasma(ev_to_radpersec(7.54)); }

std::string PermittivityModel::label() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ != ModelKind::PerfectConductor) {
    const double ev = constants::hbar / constants::elementary_charge;
    os << "(omega_p=" << omega_p_ * ev << " eV";
    if (kind_ == ModelKind::Drude) os << ", gamma=" << gamma_ * ev << " eV";
    os << ")";
  }
  return os.str();
}

ThermalState::ThermalState(double temperature_k) : temperature(temperature_k) {
  if (!(temperature_k > 0.0) || !std::isfinite(temperature_k))
    throw DomainError("temperature must be > 0 K");
}

double eps_imag(const PermittivityModel& model, double xi) {
  if (!(xi >= 0.0)) throw DomainError("eps_imag: xi must be >= 0");
  const double wp = model.plasma_frequency();
  switch (model.kind()) {
    case ModelKind::Drude:
      if (xi == 0.0) return std::numeric_limits<double>::infinity();
      return 1.0 + wp * wp / (xi * (xi + model.relaxation_rate()));
    case ModelKind::Plasma:
      if (xi == 0.0)
        throw DomainError(
            "eps_imag: plasma model is singular at xi = 0; use the static reflection "
            "coefficients instead");
      return 1.0 + wp * wp / (xi * xi);
    case ModelKind::PerfectConductor:
      return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double eps_times_xi2(const PermittivityModel& model, double xi) {
  if (!(xi >= 0.0)) throw DomainError("eps_times_xi2: xi must be >= 0");
  const double wp = model.plasma_frequency();
  switch (model.kind()) {
    case ModelKind::Drude:
      return xi * xi + wp * wp * xi / (xi + model.relaxation_rate());
    case ModelKind::Plasma:
      return xi * xi + wp * wp;
    case ModelKind::PerfectConductor:
      return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double matsubara_xi(long n, double temperature) {
  if (n < 0) throw DomainError("matsubara_xi: n must be >= 0");
  if (!(temperature > 0.0)) throw DomainError("matsubara_xi: T must be > 0");
  return 2.0 * constants::pi * static_cast<double>(n) * constants::k_B * temperature /
         constants::hbar;
}

double ev_to_radpersec(double energy_ev) {
  if (!(energy_ev >= 0.0)) throw DomainError("ev_to_radpersec: energy must be >= 0");
  return energy_ev * constants::elementary_charge / constants::hbar;
}

}  // namespace casimir::materials
