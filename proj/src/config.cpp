#include "casimir/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "casimir/error.hpp"

namespace casimir::config {

namespace {

using materials::PermittivityModel;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Strict view of a JSON object: every key must be consumed before finish().
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(join(path_, key) + ": required field missing");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key) + ": must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const long long v = integer(key);
    if (v < 0) throw ConfigError(join(path_, key) + ": must be >= 0");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(join(path_, key) + ": expected a non-negative integer");
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(join(path_, key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
        throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]: expected a finite number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Reader object(const std::string& key) { return Reader(raw(key), join(path_, key)); }
  std::string child(const std::string& key) const { return join(path_, key); }
  std::string where() const { return path_.empty() ? "config" : path_; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(join(path_, k) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> z_list(Reader& r, const std::string& array_key, const std::string& grid_key,
                           double offset) {
  const bool a = r.has(array_key), g = r.has(grid_key);
  if (a == g)
    throw ConfigError(r.where() + ": give exactly one of '" + array_key + "' or '" + grid_key + "'");
  if (a) return r.numbers(array_key);
  Reader grid = r.object(grid_key);
  const double lo = grid.number("z_min_m"), hi = grid.number("z_max_m");
  const long long n = grid.integer("n");
  grid.finish();
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError(r.child(grid_key) + ": need 0 < z_min_m < z_max_m and n >= 2");
  auto z = lifshitz::log_grid(lo, hi, static_cast<std::size_t>(n));
  for (double& v : z) v += offset;
  return z;
}

PermittivityModel named_model(const std::string& name, const std::string& path) {
  if (name == "drude") return PermittivityModel::gold_drude();
  if (name == "plasma") return PermittivityModel::gold_plasma();
  if (name == "perfect_conductor" || name == "ideal") return PermittivityModel::perfect_conductor();
  throw ConfigError(path + ": unknown model '" + name + "' (drude, plasma, perfect_conductor)");
}

std::pair<std::string, PermittivityModel> named_entry(const json& j, const std::string& path) {
  if (j.is_string()) return {j.get<std::string>(), named_model(j.get<std::string>(), path)};
  Reader r(j, path);
  std::string name = r.string("name");
  PermittivityModel m = model_from_json(r.raw("model"), r.child("model"));
  r.finish();
  return {name, m};
}

std::vector<std::pair<std::string, PermittivityModel>> model_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of models");
  std::vector<std::pair<std::string, PermittivityModel>> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(named_entry(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

simulator::PatchSource parse_patch(Reader r) {
  simulator::PatchSource s;
  auto& m = s.map;
  m.nx = r.count("nx", 128);
  m.ny = r.count("ny", 128);
  m.spacing = r.number("spacing_m");
  m.correlation_length = r.number("correlation_length_m");
  m.rms = r.number("rms_v");
  m.mean = r.number("mean_v");
  m.seed = r.seed("seed", 1);
  s.sphere_x = r.number("sphere_x_m", 0.5 * m.spacing * static_cast<double>(m.nx > 0 ? m.nx - 1 : 0));
  s.sphere_y = r.number("sphere_y_m", 0.5 * m.spacing * static_cast<double>(m.ny > 0 ? m.ny - 1 : 0));
  s.footprint_radius = r.number("footprint_radius_m", electrostatics::kDefaultFootprintRadius);
  r.finish();
  return s;
}

SweepSection parse_sweep(Reader r) {
  SweepSection s;
  s.z_off = r.number("z_off_m");
  s.z_setpoints = z_list(r, "z_setpoints_m", "z_grid", s.z_off);
  if (r.has("z_grid")) std::reverse(s.z_setpoints.begin(), s.z_setpoints.end());
  if (s.z_setpoints.empty()) throw ConfigError(r.child("z_setpoints_m") + ": empty setpoint list");
  if (r.has("voltages_v")) {
    const json& v = r.raw("voltages_v");
    if (!v.is_array()) throw ConfigError(r.child("voltages_v") + ": expected an array of arrays");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = r.child("voltages_v") + "[" + std::to_string(i) + "]";
      if (!v[i].is_array()) throw ConfigError(p + ": expected an array of numbers");
      std::vector<double> row;
      for (const auto& x : v[i]) {
        if (!x.is_number()) throw ConfigError(p + ": expected numbers");
        row.push_back(x.get<double>());
      }
      s.voltages.push_back(std::move(row));
    }
  }
  s.voltage_step = r.number("voltage_step_v", 0.1);
  s.vm_guess = r.opt_number("vm_guess_v");
  s.n_repeats = static_cast<int>(r.integer("n_repeats", 10));
  s.position_jitter = r.number("position_jitter_m", 0.0);
  r.finish();
  return s;
}

ElectrostaticsSection parse_electrostatics(Reader r) {
  ElectrostaticsSection e;
  e.v1 = r.number("v1_v");
  e.vrms = r.number("vrms_v");
  Reader vm = r.object("vm");
  const int kinds = vm.has("constant_v") + vm.has("profile") + vm.has("patch_map");
  if (kinds != 1)
    throw ConfigError(vm.where() + ": give exactly one of constant_v, profile, patch_map");
  if (vm.has("constant_v")) {
    e.vm = simulator::ConstantSource{vm.number("constant_v")};
  } else if (vm.has("profile")) {
    Reader p = vm.object("profile");
    simulator::ProfileSource src{p.numbers("z_m"), p.numbers("vm_v")};
    p.finish();
    if (src.z.size() != src.vm.size() || src.z.size() < 2)
      throw ConfigError(vm.child("profile") + ": z_m and vm_v need the same length >= 2");
    e.vm = std::move(src);
  } else {
    e.vm = parse_patch(vm.object("patch_map"));
  }
  vm.finish();
  r.finish();
  return e;
}

json merge_preset(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  if (!doc.contains("preset")) return doc;
  if (!doc["preset"].is_string()) throw ConfigError("preset: expected a string");
  json base = to_json(simulator::scenario_preset(doc["preset"].get<std::string>()));
  json patch = doc;
  patch.erase("preset");
  base.merge_patch(patch);
  return base;
}

}  // namespace

PermittivityModel model_from_json(const json& j, const std::string& path) {
  if (j.is_string()) return named_model(j.get<std::string>(), path);
  Reader r(j, path);
  const std::string kind = r.string("kind");
  PermittivityModel m = PermittivityModel::perfect_conductor();
  if (kind == "drude") {
    m = PermittivityModel::drude(materials::ev_to_radpersec(r.number("omega_p_ev")),
                                 materials::ev_to_radpersec(r.number("gamma_ev")));
  } else if (kind == "plasma") {
    m = PermittivityModel::plasma(materials::ev_to_radpersec(r.number("omega_p_ev")));
  } else if (kind != "perfect_conductor" && kind != "ideal") {
    throw ConfigError(r.child("kind") + ": unknown model kind '" + kind + "'");
  }
  r.finish();
  return m;
}

json model_to_json(const PermittivityModel& m) {
  if (m == PermittivityModel::gold_drude()) return "drude";
  if (m == PermittivityModel::gold_plasma()) return "plasma";
  if (m.kind() == materials::ModelKind::PerfectConductor) return "perfect_conductor";
  const double ev = materials::ev_to_radpersec(1.0);
  json j{{"kind", std::string(materials::to_string(m.kind()))},
         {"omega_p_ev", m.plasma_frequency() / ev}};
  if (m.kind() == materials::ModelKind::Drude) j["gamma_ev"] = m.relaxation_rate() / ev;
  return j;
}

Document parse(const json& input) {
  Document d;
  d.effective = merge_preset(input);
  Reader top(d.effective, "");
  if (top.has("preset")) top.raw("preset");
  if (top.has("name")) d.name = top.string("name");
  d.seed = top.seed("seed", 0);

  try {
    if (top.has("geometry")) {
      Reader g = top.object("geometry");
      lifshitz::Geometry geo;
      geo.sphere_radius = g.number("sphere_radius_m");
      if (g.has("configuration")) {
        const std::string c = g.string("configuration");
        if (c == "sphere_plate_pfa")
          geo.configuration = lifshitz::Configuration::SpherePlatePFA;
        else if (c == "plate_plate")
          geo.configuration = lifshitz::Configuration::PlatePlate;
        else
          throw ConfigError("geometry.configuration: expected sphere_plate_pfa or plate_plate");
      }
      g.finish();
      if (!(geo.sphere_radius > 0.0)) throw ConfigError("geometry.sphere_radius_m: must be > 0");
      d.geometry = geo;
    }
    if (top.has("temperature_k")) {
      const double t = top.number("temperature_k");
      if (t < 0.0) throw ConfigError("temperature_k: must be >= 0 (0 selects the T = 0 limit)");
      d.temperature = t == 0.0 ? std::optional<double>{} : std::optional<double>{t};
    }
    if (top.has("resonator")) {
      Reader r = top.object("resonator");
      const double fm = r.number("f_m_hz", resonator::kDefaultFm);
      const double ke = r.number("k_eff_n_per_m");
      const double q = r.number("q");
      const double a = r.number("a_rms_m");
      const double df = r.number("drive_force_n", 0.0);
      const double dw = r.number("drive_omega_rad_per_s", 0.0);
      r.finish();
      d.resonator.emplace(fm, ke, q, a, df, dw);
    }
    if (top.has("model")) {
      const json& m = top.raw("model");
      if (m.is_string() && m.get<std::string>() == "none")
        d.model = std::optional<PermittivityModel>{};
      else
        d.model = std::optional<PermittivityModel>{model_from_json(m, "model")};
    }
    if (top.has("sweep")) d.sweep = parse_sweep(top.object("sweep"));
    if (top.has("electrostatics")) d.electrostatics = parse_electrostatics(top.object("electrostatics"));
    if (top.has("noise")) {
      Reader n = top.object("noise");
      const double s = n.number("sigma_y_1s");
      const double dt = n.number("sample_interval_s");
      const std::uint64_t seed = n.seed("seed", 0);
      n.finish();
      d.noise.emplace(s, dt, seed);
    }
    if (top.has("kelvin")) {
      Reader k = top.object("kelvin");
      simulator::KelvinScanSpec s;
      s.x0 = k.number("x0_m");
      s.y0 = k.number("y0_m");
      s.step = k.number("step_m", s.step);
      s.nx = k.count("nx", s.nx);
      s.ny = k.count("ny", s.ny);
      s.z = k.number("z_m", s.z);
      k.finish();
      if (!(s.z > 0.0)) throw ConfigError("kelvin.z_m: must be > 0");
      d.kelvin = s;
    }
    if (top.has("series")) {
      Reader s = top.object("series");
      simulator::SeriesSpec spec;
      spec.n_samples = s.count("n_samples", spec.n_samples);
      spec.sample_interval = s.number("sample_interval_s", spec.sample_interval);
      spec.z = s.number("z_m", spec.z);
      s.finish();
      if (spec.n_samples < 2) throw ConfigError("series.n_samples: need at least 2");
      if (!(spec.sample_interval > 0.0)) throw ConfigError("series.sample_interval_s: must be > 0");
      d.series = spec;
    }
    if (top.has("candidates")) d.candidates = model_list(top.raw("candidates"), "candidates");
    if (top.has("curve")) {
      Reader c = top.object("curve");
      CurveRequest req;
      req.models = model_list(c.raw("models"), "curve.models");
      req.z = z_list(c, "z_m", "z_grid", 0.0);
      c.finish();
      if (req.models.empty()) throw ConfigError("curve.models: empty model list");
      if (req.z.empty()) throw ConfigError("curve.z_m: empty z-grid");
      for (double z : req.z)
        if (!(z > 0.0)) throw ConfigError("curve.z_m: separations must be > 0");
      d.curve = std::move(req);
    }
    if (top.has("fit")) {
      Reader f = top.object("fit");
      d.sigma_override = f.opt_number("sigma_override_hz");
      d.vm_smoothing_degree = static_cast<int>(f.integer("vm_smoothing_degree", 0));
      f.finish();
      if (d.sigma_override && !(*d.sigma_override > 0.0))
        throw ConfigError("fit.sigma_override_hz: must be > 0");
      if (d.vm_smoothing_degree < 0) throw ConfigError("fit.vm_smoothing_degree: must be >= 0");
    }
    if (top.has("allan")) {
      Reader a = top.object("allan");
      d.allan_taus = a.numbers("taus_s");
      a.finish();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  top.finish();
  return d;
}

Document load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse(j);
}

namespace {
template <class T>
const T& need(const std::optional<T>& v, const char* what) {
  if (!v) throw ConfigError(std::string("config: missing required section '") + what + "'");
  return *v;
}
}  // namespace

simulator::ExperimentConfig experiment(const Document& d) {
  simulator::ExperimentConfig c;
  c.name = d.name;
  c.seed = d.seed;
  const auto& s = need(d.sweep, "sweep");
  c.z_setpoints = s.z_setpoints;
  c.voltages = s.voltages;
  c.voltage_step = s.voltage_step;
  c.vm_guess = s.vm_guess;
  c.n_repeats = s.n_repeats;
  c.z_off_true = s.z_off;
  c.position_jitter = s.position_jitter;
  c.model = need(d.model, "model");
  c.geometry = need(d.geometry, "geometry");
  c.temperature = need(d.temperature, "temperature_k");
  c.resonator = need(d.resonator, "resonator");
  const auto& e = need(d.electrostatics, "electrostatics");
  c.v1 = e.v1;
  c.vrms = e.vrms;
  c.vm_source = e.vm;
  c.noise = need(d.noise, "noise");
  c.kelvin = d.kelvin;
  c.series = d.series;
  c.candidate_models = d.candidates;
  c.validate();
  return c;
}

analysis::AnalysisConfig analysis_config(const Document& d) {
  analysis::AnalysisConfig a;
  a.geometry = need(d.geometry, "geometry");
  a.temperature = need(d.temperature, "temperature_k");
  a.resonator = need(d.resonator, "resonator");
  a.candidates = d.candidates;
  if (a.candidates.empty())
    a.candidates = {{"drude", PermittivityModel::gold_drude()}, {"plasma", PermittivityModel::gold_plasma()}};
  a.sigma_override = d.sigma_override;
  a.vm_smoothing_degree = d.vm_smoothing_degree;
  return a;
}

CurveRequest curve_request(const Document& d) {
  CurveRequest r = need(d.curve, "curve");
  need(d.geometry, "geometry");
  need(d.temperature, "temperature_k");
  return r;
}

simulator::PatchSource patch_source(const Document& d) {
  const auto& e = need(d.electrostatics, "electrostatics");
  const auto* p = std::get_if<simulator::PatchSource>(&e.vm);
  if (!p) throw ConfigError("electrostatics.vm: a patch_map source is required");
  return *p;
}

json to_json(const simulator::ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["geometry"] = {{"sphere_radius_m", c.geometry.sphere_radius},
                   {"configuration", c.geometry.configuration == lifshitz::Configuration::PlatePlate
                                         ? "plate_plate"
                                         : "sphere_plate_pfa"}};
  j["temperature_k"] = c.temperature ? *c.temperature : 0.0;
  j["resonator"] = {{"f_m_hz", c.resonator.f_m},
                    {"k_eff_n_per_m", c.resonator.k_eff},
                    {"q", c.resonator.q},
                    {"a_rms_m", c.resonator.a_rms}};
  if (c.resonator.drive_force != 0.0) j["resonator"]["drive_force_n"] = c.resonator.drive_force;
  if (c.resonator.drive_omega != 0.0) j["resonator"]["drive_omega_rad_per_s"] = c.resonator.drive_omega;
  j["model"] = c.model ? model_to_json(*c.model) : json("none");
  json sweep{{"z_setpoints_m", c.z_setpoints},
             {"z_off_m", c.z_off_true},
             {"voltage_step_v", c.voltage_step},
             {"n_repeats", c.n_repeats},
             {"position_jitter_m", c.position_jitter}};
  if (!c.voltages.empty()) sweep["voltages_v"] = c.voltages;
  if (c.vm_guess) sweep["vm_guess_v"] = *c.vm_guess;
  j["sweep"] = sweep;
  json vm;
  if (const auto* k = std::get_if<simulator::ConstantSource>(&c.vm_source)) {
    vm["constant_v"] = k->vm;
  } else if (const auto* p = std::get_if<simulator::ProfileSource>(&c.vm_source)) {
    vm["profile"] = {{"z_m", p->z}, {"vm_v", p->vm}};
  } else {
    const auto& s = std::get<simulator::PatchSource>(c.vm_source);
    vm["patch_map"] = {{"nx", s.map.nx},
                       {"ny", s.map.ny},
                       {"spacing_m", s.map.spacing},
                       {"correlation_length_m", s.map.correlation_length},
                       {"rms_v", s.map.rms},
                       {"mean_v", s.map.mean},
                       {"seed", s.map.seed},
                       {"sphere_x_m", s.sphere_x},
                       {"sphere_y_m", s.sphere_y},
                       {"footprint_radius_m", s.footprint_radius}};
  }
  j["electrostatics"] = {{"v1_v", c.v1}, {"vrms_v", c.vrms}, {"vm", vm}};
  j["noise"] = {{"sigma_y_1s", c.noise.sigma_y_1s},
                {"sample_interval_s", c.noise.sample_interval},
                {"seed", c.noise.seed}};
  if (c.kelvin)
    j["kelvin"] = {{"x0_m", c.kelvin->x0}, {"y0_m", c.kelvin->y0}, {"step_m", c.kelvin->step},
                   {"nx", c.kelvin->nx},   {"ny", c.kelvin->ny},   {"z_m", c.kelvin->z}};
  if (c.series)
    j["series"] = {{"n_samples", c.series->n_samples},
                   {"sample_interval_s", c.series->sample_interval},
                   {"z_m", c.series->z}};
  json cands = json::array();
  for (const auto& [name, m] : c.candidate_models) {
    const json mj = model_to_json(m);
    if (mj.is_string() && mj.get<std::string>() == name)
      cands.push_back(name);
    else
      cands.push_back({{"name", name}, {"model", mj}});
  }
  j["candidates"] = cands;
  return j;
}

}  // namespace casimir::config
