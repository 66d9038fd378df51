#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "casimir/electrostatics.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/resonator.hpp"

namespace casimir::simulator {

enum class Direction { Approach, Retract };
std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct SweepRecord {
  int run_id = 0;
  Direction direction = Direction::Approach;
  double z_setpoint = 0.0;  // m, piezo coordinate
  double applied_v = 0.0;   // V
  double measured_f = 0.0;  // Hz

  bool operator==(const SweepRecord&) const = default;
};

struct PatchMapSpec {
  std::size_t nx = 128, ny = 128;
  double spacing = 2e-6;
  double correlation_length = 10e-6;
  double rms = 0.0;
  double mean = 0.0;
  std::uint64_t seed = 1;
};

/// V_m(z) from a patch map seen by the sphere at (sphere_x, sphere_y).
struct PatchSource {
  PatchMapSpec map;
  double sphere_x = 0.0, sphere_y = 0.0;
  double footprint_radius = electrostatics::kDefaultFootprintRadius;
};
struct ProfileSource {
  std::vector<double> z;  // m
  std::vector<double> vm; // V
};
struct ConstantSource {
  double vm = 0.0;
};
using VmSource = std::variant<ConstantSource, ProfileSource, PatchSource>;

struct KelvinScanSpec {
  double x0 = 0.0, y0 = 0.0;  // first scan point, m
  double step = 4e-6;
  std::size_t nx = 26, ny = 26;
  double z = 2e-6;
};

/// Optional constant-distance frequency record for stability analysis.
struct SeriesSpec {
  std::size_t n_samples = 100000;
  double sample_interval = 0.1;  // s
  double z = 1e-6;               // m, electrostatic distance
};

struct ExperimentConfig {
  std::string name = "custom";
  /// Setpoints in approach order (strictly decreasing), piezo coordinate.
  std::vector<double> z_setpoints;
  /// Explicit voltages per setpoint; empty means vm_guess +- voltage_step.
  std::vector<std::vector<double>> voltages;
  double voltage_step = 0.1;
  std::optional<double> vm_guess;
  int n_repeats = 10;
  double z_off_true = 0.0;
  double position_jitter = 0.0;  // m rms, drawn independently per record

  std::optional<materials::PermittivityModel> model;  // nullopt: no Casimir force
  lifshitz::Geometry geometry;
  std::optional<double> temperature = 293.15;          // nullopt: T = 0 path
  resonator::ResonatorParams resonator{resonator::kDefaultFm, 4000.0, 14000.0, 10e-9};
  double v1 = 0.0;
  double vrms = 0.0;
  VmSource vm_source = ConstantSource{};
  resonator::NoiseSpec noise{0.0, 1.0, 0};
  std::uint64_t seed = 0;

  std::optional<KelvinScanSpec> kelvin;
  std::optional<SeriesSpec> series;
  /// Models compared by the fit stage; names refer to `candidate_models`.
  std::vector<std::pair<std::string, materials::PermittivityModel>> candidate_models;

  void validate() const;
};

/// Noise-free physical state of the experiment at one setpoint.
struct SetpointTruth {
  double z_setpoint;
  double z_electrostatic;  // z_setpoint - z_off (+ jitter)
  double z_physical;       // distance-corrected gap
  double kp;               // Hz^2/V^2
  double vm;               // V
  double casimir_gradient;   // apparent gradient F'_a, N/m
  double residual_gradient;  // N/m
  double f0;                 // Hz
};

/// Precomputes the Casimir curve and V_m(z) table for a configuration and
/// generates sweeps from them. Cheap to copy-run with different seeds.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  SetpointTruth truth(double z_setpoint, double jitter = 0.0) const;
  std::vector<SweepRecord> run() const;
  std::vector<SweepRecord> run(std::uint64_t seed) const;

  /// V_m(z) seen by the sphere (physical gap).
  const electrostatics::VmProfile& vm_profile() const { return vm_; }
  const std::optional<electrostatics::PatchMap>& patch_map() const { return map_; }
  const std::optional<lifshitz::CurveInterpolant>& casimir() const { return casimir_; }
  double z_physical_min() const { return z_lo_; }
  double z_physical_max() const { return z_hi_; }

 private:
  std::vector<double> voltages_at(std::size_t setpoint) const;

  ExperimentConfig cfg_;
  std::optional<electrostatics::PatchMap> map_;
  electrostatics::VmProfile vm_ = electrostatics::VmProfile::constant(0.0);
  std::optional<lifshitz::CurveInterpolant> casimir_;
  double z_lo_ = 0.0, z_hi_ = 0.0;
};

std::vector<SweepRecord> run_experiment(const ExperimentConfig& cfg);

struct KelvinGrid {
  std::vector<double> x, y;  // scan coordinates, m
  std::vector<double> vm;    // row-major, x fastest
  double z = 0.0;
  double rms() const;
  double mean() const;
};

KelvinGrid run_kelvin_scan(const electrostatics::PatchMap& map, const KelvinScanSpec& scan,
                           double radius,
                           double footprint_radius = electrostatics::kDefaultFootprintRadius);

/// Named scenarios: "sample_a", "sample_b", "ideal".
ExperimentConfig scenario_preset(std::string_view name);

/// Log-spaced electrostatic distances turned into approach-ordered setpoints.
std::vector<double> approach_setpoints(double z_min, double z_max, std::size_t n, double z_off);

/// Casimir curve samples per decade used by the simulator and fitter.
inline constexpr std::size_t kCurvePointsPerDecade = 120;

}  // namespace casimir::simulator
