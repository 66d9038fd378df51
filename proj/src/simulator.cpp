#include "casimir/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "casimir/error.hpp"

namespace casimir::simulator {

using electrostatics::VmProfile;

std::string_view to_string(Direction d) { return d == Direction::Approach ? "approach" : "retract"; }

Direction direction_from_string(std::string_view s) {
  if (s == "approach") return Direction::Approach;
  if (s == "retract") return Direction::Retract;
  throw ConfigError("unknown sweep direction '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  if (z_setpoints.empty()) throw ConfigError("sweep: z_setpoints is empty");
  for (std::size_t i = 0; i < z_setpoints.size(); ++i) {
    if (!std::isfinite(z_setpoints[i])) throw ConfigError("sweep: non-finite setpoint");
    if (!(z_setpoints[i] > z_off_true)) {
      std::ostringstream os;
      os << "sweep: setpoint " << z_setpoints[i] << " m is not above z_off " << z_off_true << " m";
      throw ConfigError(os.str());
    }
    if (i > 0 && !(z_setpoints[i] < z_setpoints[i - 1]))
      throw ConfigError("sweep: z_setpoints must be strictly decreasing (approach order)");
  }
  if (n_repeats < 1) throw ConfigError("sweep: n_repeats must be >= 1");
  if (!(position_jitter >= 0.0)) throw ConfigError("sweep: position jitter must be >= 0");
  if (!(voltage_step > 0.0) && voltages.empty()) throw ConfigError("sweep: voltage step must be > 0");
  if (!voltages.empty()) {
    if (voltages.size() != z_setpoints.size())
      throw ConfigError("sweep: need one voltage list per setpoint");
    for (const auto& vs : voltages) {
      std::set<double> distinct;
      for (double v : vs) {
        if (!std::isfinite(v)) throw ConfigError("sweep: non-finite voltage");
        distinct.insert(v);
      }
      if (distinct.size() < 3) throw ConfigError("sweep: each setpoint needs 3 distinct voltages");
    }
  }
  if (vm_guess && !std::isfinite(*vm_guess)) throw ConfigError("sweep: vm_guess must be finite");
  if (!(geometry.sphere_radius > 0.0)) throw ConfigError("geometry: sphere radius must be > 0");
  if (temperature && !(*temperature > 0.0)) throw ConfigError("thermal: temperature must be > 0");
  if (!(vrms >= 0.0)) throw ConfigError("electrostatics: vrms must be >= 0");
  if (!std::isfinite(v1)) throw ConfigError("electrostatics: v1 must be finite");
}

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const double a_rms = cfg_.resonator.a_rms;
  const double spread = 8.0 * cfg_.position_jitter;
  const double es_min = cfg_.z_setpoints.back() - cfg_.z_off_true - spread;
  const double es_max = cfg_.z_setpoints.front() - cfg_.z_off_true + spread;
  if (!(es_min > 0.0)) throw ConfigError("sweep: closest setpoint is within jitter of contact");
  z_lo_ = resonator::distance_correction(es_min, a_rms) * (1.0 - 1e-3);
  z_hi_ = resonator::distance_correction(es_max, a_rms) * (1.0 + 1e-3);
  if (cfg_.series) {
    const double zs = resonator::distance_correction(cfg_.series->z, a_rms);
    z_lo_ = std::min(z_lo_, zs * (1.0 - 1e-3));
    z_hi_ = std::max(z_hi_, zs * (1.0 + 1e-3));
  }

  if (cfg_.model) {
    const double decades = std::log10(z_hi_ / z_lo_);
    const auto n = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::ceil(decades * kCurvePointsPerDecade)) + 2);
    casimir_.emplace(lifshitz::compute_force_curve(*cfg_.model, lifshitz::log_grid(z_lo_, z_hi_, n),
                                                   cfg_.temperature, cfg_.geometry));
  }

  if (const auto* c = std::get_if<ConstantSource>(&cfg_.vm_source)) {
    vm_ = VmProfile::constant(c->vm);
  } else if (const auto* p = std::get_if<ProfileSource>(&cfg_.vm_source)) {
    vm_ = VmProfile::table(p->z, p->vm);
    if (!vm_.contains(z_lo_) || !vm_.contains(z_hi_))
      throw ConfigError("electrostatics: V_m profile does not cover the simulated distances");
  } else {
    const auto& ps = std::get<PatchSource>(cfg_.vm_source);
    map_.emplace(electrostatics::generate_patch_map(ps.map.nx, ps.map.ny, ps.map.spacing,
                                                    ps.map.correlation_length, ps.map.rms,
                                                    ps.map.mean, ps.map.seed));
    const auto grid = lifshitz::log_grid(z_lo_, z_hi_, 64);
    std::vector<double> vm(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      vm[i] = electrostatics::vm_from_patches(*map_, ps.sphere_x, ps.sphere_y, grid[i],
                                              cfg_.geometry.sphere_radius, ps.footprint_radius);
    vm_ = VmProfile::table(grid, vm);
  }
}

SetpointTruth Experiment::truth(double z_setpoint, double jitter) const {
  const auto& res = cfg_.resonator;
  SetpointTruth t{};
  t.z_setpoint = z_setpoint;
  t.z_electrostatic = z_setpoint - cfg_.z_off_true + jitter;
  if (!(t.z_electrostatic > 0.0)) throw ConfigError("sweep: sphere in contact with the membrane");
  t.z_physical = resonator::distance_correction(t.z_electrostatic, res.a_rms);
  t.kp = electrostatics::kp_model(z_setpoint + jitter, cfg_.geometry.sphere_radius, res.f_m,
                                  res.k_eff, cfg_.z_off_true);
  t.vm = vm_.value(t.z_physical);
  t.casimir_gradient =
      casimir_ ? lifshitz::apparent_force_gradient(casimir_->d1(t.z_physical),
                                                   casimir_->d3(t.z_physical), res.a_rms)
               : 0.0;
  electrostatics::ElectrostaticEnv env{cfg_.geometry.sphere_radius, cfg_.v1, cfg_.vrms, vm_};
  t.residual_gradient = electrostatics::residual_force(t.z_physical, env, 1);
  t.f0 = res.f_m + resonator::freq_shift(t.casimir_gradient + t.residual_gradient, res);
  return t;
}

std::vector<double> Experiment::voltages_at(std::size_t i) const {
  if (!cfg_.voltages.empty()) return cfg_.voltages[i];
  const double center = cfg_.vm_guess ? *cfg_.vm_guess : truth(cfg_.z_setpoints[i]).vm;
  return {center - cfg_.voltage_step, center, center + cfg_.voltage_step};
}

std::vector<SweepRecord> Experiment::run() const { return run(cfg_.seed); }

std::vector<SweepRecord> Experiment::run(std::uint64_t seed) const {
  const std::size_t n_set = cfg_.z_setpoints.size();
  std::vector<std::vector<double>> volts(n_set);
  for (std::size_t i = 0; i < n_set; ++i) volts[i] = voltages_at(i);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = cfg_.noise.per_sample_sigma();

  std::vector<SweepRecord> out;
  out.reserve(static_cast<std::size_t>(cfg_.n_repeats) * 2 * n_set * 3);
  for (int rep = 0; rep < cfg_.n_repeats; ++rep) {
    for (Direction dir : {Direction::Approach, Direction::Retract}) {
      for (std::size_t s = 0; s < n_set; ++s) {
        const std::size_t i = dir == Direction::Approach ? s : n_set - 1 - s;
        const double zs = cfg_.z_setpoints[i];
        for (double v : volts[i]) {
          const double jitter = cfg_.position_jitter > 0.0 ? cfg_.position_jitter * normal(rng) : 0.0;
          const SetpointTruth t = truth(zs, jitter);
          const double dv = v - t.vm;
          const double f2 = t.f0 * t.f0 - t.kp * dv * dv;
          if (!(f2 > 0.0)) {
            std::ostringstream os;
            os << "sweep: voltage " << v << " V at setpoint " << zs
               << " m pulls the resonance to zero frequency";
            throw ConfigError(os.str());
          }
          double f = std::sqrt(f2);
          if (sigma > 0.0) f *= 1.0 + sigma * normal(rng);
          out.push_back({rep, dir, zs, v, f});
        }
      }
    }
  }
  return out;
}

std::vector<SweepRecord> run_experiment(const ExperimentConfig& cfg) { return Experiment(cfg).run(); }

double KelvinGrid::mean() const {
  double s = 0.0;
  for (double v : vm) s += v;
  return vm.empty() ? 0.0 : s / static_cast<double>(vm.size());
}

double KelvinGrid::rms() const {
  const double m = mean();
  double s = 0.0;
  for (double v : vm) s += (v - m) * (v - m);
  return vm.empty() ? 0.0 : std::sqrt(s / static_cast<double>(vm.size()));
}

KelvinGrid run_kelvin_scan(const electrostatics::PatchMap& map, const KelvinScanSpec& scan,
                           double radius, double footprint_radius) {
  if (scan.nx == 0 || scan.ny == 0) throw ConfigError("kelvin scan: empty scan grid");
  if (!(scan.step > 0.0) && (scan.nx > 1 || scan.ny > 1))
    throw ConfigError("kelvin scan: step must be > 0");
  KelvinGrid g;
  g.z = scan.z;
  for (std::size_t i = 0; i < scan.nx; ++i) g.x.push_back(scan.x0 + static_cast<double>(i) * scan.step);
  for (std::size_t j = 0; j < scan.ny; ++j) g.y.push_back(scan.y0 + static_cast<double>(j) * scan.step);
  g.vm.reserve(scan.nx * scan.ny);
  for (double y : g.y)
    for (double x : g.x)
      g.vm.push_back(electrostatics::vm_from_patches(map, x, y, scan.z, radius, footprint_radius));
  return g;
}

std::vector<double> approach_setpoints(double z_min, double z_max, std::size_t n, double z_off) {
  auto grid = lifshitz::log_grid(z_min, z_max, n);
  std::reverse(grid.begin(), grid.end());
  for (double& z : grid) z += z_off;
  return grid;
}

namespace {

ExperimentConfig baseline_experiment() {
  ExperimentConfig c;
  c.z_setpoints = approach_setpoints(100e-9, 2e-6, 35, 50e-9);
  c.voltage_step = 0.5;
  c.n_repeats = 10;
  c.z_off_true = 50e-9;
  c.position_jitter = 1e-9;
  c.model = materials::PermittivityModel::gold_drude();
  c.geometry = {4e-3, lifshitz::Configuration::SpherePlatePFA};
  c.temperature = 293.15;
  c.resonator = resonator::ResonatorParams(resonator::kDefaultFm, 4000.0, 14000.0, 10e-9);
  c.noise = resonator::NoiseSpec(2e-9, 0.4, 7);
  c.seed = 2012;
  c.candidate_models = {{"drude", materials::PermittivityModel::gold_drude()},
                        {"plasma", materials::PermittivityModel::gold_plasma()}};
  return c;
}

PatchSource centered_patches(PatchMapSpec spec) {
  PatchSource s;
  s.map = spec;
  s.sphere_x = 0.5 * spec.spacing * static_cast<double>(spec.nx - 1);
  s.sphere_y = 0.5 * spec.spacing * static_cast<double>(spec.ny - 1);
  return s;
}

KelvinScanSpec centered_scan(const PatchSource& s, double z) {
  KelvinScanSpec k;
  k.step = 4e-6;
  k.nx = k.ny = 26;
  k.x0 = s.sphere_x - 50e-6;
  k.y0 = s.sphere_y - 50e-6;
  k.z = z;
  return k;
}

}  // namespace

ExperimentConfig scenario_preset(std::string_view name) {
  if (name == "sample_a") {
    ExperimentConfig c = baseline_experiment();
    c.name = "sample_a";
    PatchMapSpec m;
    m.rms = 0.317;
    m.mean = 0.10;
    m.correlation_length = 24e-6;
    m.seed = 11;
    const PatchSource src = centered_patches(m);
    c.vm_source = src;
    c.kelvin = centered_scan(src, 0.15e-6);
    c.vrms = 0.14;
    c.v1 = -0.08;
    return c;
  }
  if (name == "sample_b") {
    ExperimentConfig c = baseline_experiment();
    c.name = "sample_b";
    PatchMapSpec m;
    m.rms = 3e-3;
    m.mean = 0.02;
    m.correlation_length = 4e-6;
    m.seed = 12;
    const PatchSource src = centered_patches(m);
    c.vm_source = src;
    c.kelvin = centered_scan(src, 0.15e-6);
    c.vrms = 11.6e-3;
    c.v1 = -0.017;
    return c;
  }
  if (name == "ideal") {
    ExperimentConfig c = baseline_experiment();
    c.name = "ideal";
    c.model = materials::PermittivityModel::perfect_conductor();
    c.position_jitter = 0.0;
    c.noise = resonator::NoiseSpec(0.0, 0.4, 7);
    c.vm_source = ConstantSource{0.0};
    c.vrms = 0.0;
    c.v1 = 0.0;
    c.candidate_models.insert(c.candidate_models.begin(),
                              {"perfect_conductor", materials::PermittivityModel::perfect_conductor()});
    return c;
  }
  throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
}

}  // namespace casimir::simulator
