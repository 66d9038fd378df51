#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casimir/analysis.hpp"
#include "casimir/config.hpp"
#include "casimir/error.hpp"
#include "casimir/io.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/resonator.hpp"
#include "casimir/simulator.hpp"

namespace fs = std::filesystem;
using namespace casimir;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string data;
  std::vector<double> taus;
};

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("--out: cannot create directory " + o.out);
  return dir;
}

config::Document load_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  return config::load(o.config);
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return s;
}

int cmd_curve(const Options& o) {
  const auto doc = load_config(o);
  const auto req = config::curve_request(doc);
  const auto dir = out_dir(o);
  for (const auto& [name, model] : req.models) {
    const auto curve = lifshitz::compute_force_curve(model, req.z, *doc.temperature, *doc.geometry);
    if (o.format == "json")
      io::write_text(dir / ("curve_" + slug(name) + ".json"), io::curve_json(curve).dump(2) + "\n");
    else
      io::write_text(dir / ("curve_" + slug(name) + ".csv"), io::curve_csv(curve));
  }
  std::cout << "curve: " << req.models.size() << " model(s), " << req.z.size() << " points\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto doc = load_config(o);
  auto cfg = config::experiment(doc);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.noise.seed = *o.seed;
  }
  const auto dir = out_dir(o);
  const simulator::Experiment exp(cfg);
  const auto records = exp.run();
  if (o.format == "json")
    io::write_text(dir / "records.jsonl", io::records_jsonl(records));
  else
    io::write_text(dir / "records.csv", io::records_csv(records));
  io::write_text(dir / "config.json", config::to_json(cfg).dump(2) + "\n");
  io::write_text(dir / "vm_truth.csv", io::vm_profile_csv(exp.vm_profile()));
  if (cfg.kelvin && exp.patch_map()) {
    const auto grid = simulator::run_kelvin_scan(*exp.patch_map(), *cfg.kelvin, cfg.geometry.sphere_radius,
                                                 std::get<simulator::PatchSource>(cfg.vm_source).footprint_radius);
    io::write_text(dir / "kelvin.csv", io::kelvin_csv(grid));
  }
  if (cfg.series) {
    const auto truth = exp.truth(cfg.series->z + cfg.z_off_true);
    const resonator::NoiseSpec spec(cfg.noise.sigma_y_1s, cfg.series->sample_interval, cfg.noise.seed);
    const auto f = resonator::simulate_frequency_series(truth.f0, cfg.series->n_samples, spec);
    io::write_text(dir / "series.csv", io::series_csv(f, cfg.series->sample_interval));
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "simulate: %zu records, z_setpoint = [%.6g, %.6g] m, seed %llu\n",
                records.size(), cfg.z_setpoints.back(), cfg.z_setpoints.front(),
                static_cast<unsigned long long>(cfg.seed));
  std::cout << buf;
  return 0;
}

int cmd_fit(const Options& o) {
  const auto doc = load_config(o);
  if (o.data.empty()) throw ConfigError("--data is required for fit");
  const auto records = io::read_records(o.data);
  const auto acfg = config::analysis_config(doc);
  const auto dir = out_dir(o);
  analysis::AnalysisResult res;
  try {
    res = analysis::analyze(records, acfg);
  } catch (const NumericalError& e) {
    io::write_text(dir / "fit_trace.txt", std::string(e.what()) + "\n");
    throw;
  }
  io::write_text(dir / "report.json", io::analysis_json(res).dump(2) + "\n");
  io::write_text(dir / "report.txt", io::analysis_text(res));
  io::write_text(dir / "setpoints.csv", io::setpoints_csv(res.setpoints));
  io::write_text(dir / "vm_profile.csv", io::vm_profile_csv(res.vm));
  std::string trace;
  bool any_ok = false;
  for (const auto& r : res.comparison.ranked) {
    if (r.ok()) {
      any_ok = true;
      io::write_text(dir / ("residuals_" + slug(r.model) + ".csv"), io::residuals_csv(r));
    } else {
      trace += r.model + ": " + r.error + "\n";
    }
  }
  std::cout << res.comparison.verdict << '\n';
  if (!trace.empty()) io::write_text(dir / "fit_trace.txt", trace);
  if (!any_ok) {
    std::cerr << "error: no candidate model could be fitted (see fit_trace.txt)\n";
    int code = 2;
    for (const auto& r : res.comparison.ranked) code = std::max(code, r.error_exit_code);
    return code;
  }
  return 0;
}

int cmd_allan(const Options& o) {
  if (o.data.empty()) throw ConfigError("--data is required for allan");
  std::vector<double> taus = o.taus;
  if (taus.empty() && !o.config.empty()) taus = load_config(o).allan_taus;
  const auto series = io::read_series(o.data);
  const double dt = io::sample_interval(series);
  if (taus.empty()) taus = analysis::octave_taus(series.f.size(), dt);
  const auto table = analysis::allan_deviation(series.f, dt, taus);
  const auto dir = out_dir(o);
  if (o.format == "json")
    io::write_text(dir / "allan.json", io::allan_json(table).dump(2) + "\n");
  else
    io::write_text(dir / "allan.csv", io::allan_csv(table));
  std::cout << "allan: " << table.size() << " tau values, " << series.f.size() << " samples\n";
  return 0;
}

int cmd_kelvin_map(const Options& o) {
  const auto doc = load_config(o);
  auto ps = config::patch_source(doc);
  if (o.seed) ps.map.seed = *o.seed;
  if (!doc.kelvin) throw ConfigError("config: missing required section 'kelvin'");
  if (!doc.geometry) throw ConfigError("config: missing required section 'geometry'");
  const auto& m = ps.map;
  const auto map = electrostatics::generate_patch_map(m.nx, m.ny, m.spacing, m.correlation_length, m.rms,
                                                      m.mean, m.seed);
  const auto grid = simulator::run_kelvin_scan(map, *doc.kelvin, doc.geometry->sphere_radius,
                                               ps.footprint_radius);
  const auto dir = out_dir(o);
  io::write_text(dir / "patch_map.csv", io::patch_map_csv(map));
  io::write_text(dir / "patch_map.json", io::patch_map_json(map).dump(2) + "\n");
  io::write_text(dir / "kelvin.csv", io::kelvin_csv(grid));
  char buf[256];
  std::snprintf(buf, sizeof buf, "kelvin-map: %zux%zu scan at z = %.4g m, mean %.6g V, rms %.6g V\n",
                grid.x.size(), grid.y.size(), grid.z, grid.mean(), grid.rms());
  std::cout << buf;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir force-gradient experiment: theory curves, synthetic sweeps and model fits"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "experiment configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  auto* curve = app.add_subcommand("curve", "Casimir force, gradient and third derivative curves");
  common(curve, true);
  auto* simulate = app.add_subcommand("simulate", "synthetic sweep records and Kelvin scan");
  common(simulate, true);
  simulate->add_option("--seed", o.seed, "override the noise seeds");
  auto* fit = app.add_subcommand("fit", "calibration, V_m profile and model comparison");
  common(fit, true);
  fit->add_option("--data", o.data, "sweep records (CSV or JSON lines)")->required();
  auto* allan = app.add_subcommand("allan", "Allan deviation of a frequency series");
  common(allan, false);
  allan->add_option("--data", o.data, "frequency series CSV (t_s,f_Hz)")->required();
  allan->add_option("--taus", o.taus, "integration times in s")->delimiter(',');
  auto* kelvin = app.add_subcommand("kelvin-map", "patch map and simulated Kelvin-probe scan");
  common(kelvin, true);
  kelvin->add_option("--seed", o.seed, "override the patch map seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*curve) return cmd_curve(o);
    if (*simulate) return cmd_simulate(o);
    if (*fit) return cmd_fit(o);
    if (*allan) return cmd_allan(o);
    if (*kelvin) return cmd_kelvin_map(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
