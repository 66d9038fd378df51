#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "casimir/analysis.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/resonator.hpp"
#include "casimir/simulator.hpp"

using namespace casimir;
namespace fs = std::filesystem;
using materials::PermittivityModel;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHbar = 1.054571817e-34;
constexpr double kC = 299792458.0;
constexpr double kRoom = 293.15;

double rel(double a, double b) { return std::abs(a / b - 1.0); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d  %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt);
  std::fflush(stdout);
}

void info(const std::string& s) {
  std::printf("     info: %s\n", s.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1
Outcome ideal_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pc = PermittivityModel::perfect_conductor();
  double worst_e = 0.0, worst_p = 0.0;
  for (double z : {100e-9, 500e-9, 1e-6}) {
    const auto pp = lifshitz::plate_plate_zero_temperature(pc, z);
    const double e = -kHbar * kC * kPi * kPi / (720.0 * z * z * z);
    const double p = -kHbar * kC * kPi * kPi / (240.0 * z * z * z * z);
    worst_e = std::max(worst_e, rel(pp.energy, e));
    worst_p = std::max(worst_p, rel(pp.pressure, p));
  }
  const double dt = seconds_since(t0);
  return {worst_e < 1e-3 && worst_p < 1e-3 && dt < 10.0,
          fmt("max rel err energy %.2e, pressure %.2e (< 1e-3), %.2f s (< 10 s)", worst_e, worst_p, dt)};
}

// 2
Outcome plasma_limit() {
  const double z = 100e-9;
  const auto pl = PermittivityModel::plasma(100.0 * kC / z);
  const double ideal = -kHbar * kC * kPi * kPi / (720.0 * z * z * z);
  const double ratio = lifshitz::plate_plate_energy(pl, z) / ideal;
  // independent high-frequency expansion in d = c / (omega_p z)
  const double d = 0.01;
  const double series = 1.0 - 4.0 * d + 72.0 / 5.0 * d * d - 320.0 / 7.0 * (1.0 - kPi * kPi / 210.0) * d * d * d;
  info(fmt("expansion 1 - 4d + 72/5 d^2 - ... at d = 0.01 gives %.6f; computed %.6f (diff %.1e)", series, ratio,
           std::abs(series - ratio)));
  for (double w : {400.0, 1000.0}) {
    const auto m = PermittivityModel::plasma(w * kC / z);
    info(fmt("omega_p = %.0f c/z: E/E_ideal = %.6f", w, lifshitz::plate_plate_energy(m, z) / ideal));
  }
  return {std::abs(ratio - 1.0) < 0.01, fmt("E/E_ideal = %.6f at omega_p = 100 c/z (need within 1%%)", ratio)};
}

// 3
Outcome te_zero() {
  const double z = 1e-6;
  lifshitz::LifshitzOptions off;
  off.include_static_te = false;
  const auto dr = PermittivityModel::gold_drude();
  const auto pl = PermittivityModel::gold_plasma();
  const auto a = lifshitz::plate_plate(dr, z, kRoom), b = lifshitz::plate_plate(dr, z, kRoom, off);
  const bool same = a.energy == b.energy && a.pressure == b.pressure && a.dpressure == b.dpressure &&
                    a.d2pressure == b.d2pressure;
  const double fa = lifshitz::sphere_plate_force(dr, z, kRoom, 4e-3, 1);
  const double fb = lifshitz::sphere_plate_force(dr, z, kRoom, 4e-3, 1, off);
  const auto c = lifshitz::plate_plate(pl, z, kRoom), e = lifshitz::plate_plate(pl, z, kRoom, off);
  const double change = rel(e.energy, c.energy);
  return {same && fa == fb && c.energy != e.energy && c.pressure != e.pressure,
          fmt("drude bitwise %s, plasma energy changes by %.3e relative", same && fa == fb ? "equal" : "DIFFERENT",
              change)};
}

// 4
Outcome classical_factor() {
  const double z = 50e-6;
  const double pc = lifshitz::plate_plate_pressure(PermittivityModel::perfect_conductor(), z, kRoom, 0);
  const double dr = lifshitz::plate_plate_pressure(PermittivityModel::gold_drude(), z, kRoom, 0);
  const double r = pc / dr;
  return {r >= 1.9 && r <= 2.1, fmt("P_pc / P_drude = %.5f (in [1.9, 2.1])", r)};
}

// 5
Outcome derivatives() {
  double worst1 = 0.0, worst3 = 0.0;
  const double r = 4e-3;
  for (const auto& m : {PermittivityModel::gold_drude(), PermittivityModel::gold_plasma()})
    for (double z : lifshitz::log_grid(100e-9, 2e-6, 12)) {
      const double h = 1e-3 * z;
      const double f1 = lifshitz::sphere_plate_force(m, z, kRoom, r, 1);
      const double fd1 =
          -(lifshitz::sphere_plate_force(m, z + h, kRoom, r, 0) - lifshitz::sphere_plate_force(m, z - h, kRoom, r, 0)) /
          (2 * h);
      const double f3 = lifshitz::sphere_plate_force(m, z, kRoom, r, 3);
      const double fd3 = (lifshitz::sphere_plate_force(m, z + h, kRoom, r, 1) - 2 * f1 +
                          lifshitz::sphere_plate_force(m, z - h, kRoom, r, 1)) /
                         (h * h);
      worst1 = std::max(worst1, rel(fd1, f1));
      worst3 = std::max(worst3, rel(fd3, f3));
    }
  return {worst1 < 1e-4 && worst3 < 1e-4,
          fmt("drude+plasma, 12 z in [100 nm, 2 um]: max rel err order 1 %.2e, order 3 %.2e (< 1e-4)", worst1, worst3)};
}

// 6
Outcome parabola() {
  auto points = [](double f0, double kp, double vm, std::initializer_list<double> vs) {
    std::vector<analysis::VoltagePoint> p;
    for (double v : vs) p.push_back({v, std::sqrt(f0 * f0 - kp * (v - vm) * (v - vm))});
    return p;
  };
  double worst = 0.0;
  {
    const auto fit = analysis::fit_parabola(points(10.0, 2.0, 0.1, {-1.0, 0.0, 1.0}));
    worst = std::max({rel(fit.f0 * fit.f0, 100.0), rel(fit.kp, 2.0), rel(fit.vm, 0.1)});
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double f0 = 10.0 * (1.0 + 0.5 * u(rng));
    const double kp = f0 * f0 / 4.0 * (1.0 + 0.5 * u(rng));
    const double vm = 0.3 * u(rng);
    const auto fit = analysis::fit_parabola(points(f0, kp, vm, {vm - 1.0, vm + 0.2 * u(rng), vm + 1.0}));
    worst = std::max({worst, rel(fit.f0, f0), rel(fit.kp, kp), std::abs(fit.vm - vm) / std::max(std::abs(vm), 0.1)});
  }
  // experiment-sized sweeps carry less information after f is rounded to double
  const auto cfg = simulator::scenario_preset("sample_b");
  const simulator::Experiment exp(cfg);
  double sim_worst = 0.0, floor_worst = 0.0;
  for (double zs : cfg.z_setpoints) {
    const auto t = exp.truth(zs);
    const double step = cfg.voltage_step;
    const auto fit = analysis::fit_parabola(points(t.f0, t.kp, t.vm, {t.vm - step, t.vm, t.vm + step}));
    sim_worst = std::max({sim_worst, rel(fit.f0, t.f0), rel(fit.kp, t.kp)});
    floor_worst = std::max(floor_worst, 2.0 * t.f0 * t.f0 * 2.2e-16 / (t.kp * step * step));
  }
  info(fmt("sample_b sweeps (f ~ 1e5 Hz, step %.1f V): max rel err %.2e; double rounding of f limits K_p to ~%.1e",
           cfg.voltage_step, sim_worst, floor_worst));
  return {worst < 1e-12, fmt("max rel err over the exact example and 1000 random triples %.2e (< 1e-12)", worst)};
}

// 7
Outcome calibration() {
  const auto cfg = simulator::scenario_preset("sample_b");
  const double r = 4e-3, fm = 1e5, k = 4000.0, zoff = 50e-9;
  const auto& zs = cfg.z_setpoints;
  std::vector<analysis::KpSample> s;
  for (double z : zs) s.push_back({z, electrostatics::kp_model(z, r, fm, k, zoff)});
  const auto c = analysis::calibrate_kp(s, r, fm);
  const double ek = rel(c.k_eff, k), ez = rel(c.z_off, zoff);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1e-9);
  double worst = 0.0, sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<analysis::KpSample> j;
    for (double z : zs) j.push_back({z, electrostatics::kp_model(z + g(rng), r, fm, k, zoff)});
    const double d = std::abs(analysis::calibrate_kp(j, r, fm).z_off - zoff);
    worst = std::max(worst, d);
    sum += d * d;
  }
  info(fmt("jittered z_off rms error %.3f nm over %zu setpoints", std::sqrt(sum / 100.0) * 1e9, zs.size()));
  return {ek < 5e-7 && ez < 5e-7 && worst < 2e-9,
          fmt("noiseless rel err k_eff %.1e, z_off %.1e (6 digits); 1 nm jitter max |dz_off| = %.3f nm over 100 (< 2 nm)",
              ek, ez, worst * 1e9)};
}

// 8
Outcome allan() {
  const auto t0 = std::chrono::steady_clock::now();
  const resonator::NoiseSpec spec(2e-9, 0.1, 8);
  const auto s = resonator::simulate_frequency_series(1e5, 100000, spec);
  const auto taus = analysis::octave_taus(s.size(), 0.1);
  const auto table = analysis::allan_deviation(s, 0.1, taus);
  const std::vector<double> one{1.0};
  const double at1 = analysis::allan_deviation(s, 0.1, one)[0].sigma_y;
  const double slope = analysis::loglog_slope(table);
  const double dt = seconds_since(t0);
  return {rel(at1, 2e-9) < 0.15 && slope >= -0.6 && slope <= -0.4 && dt < 10.0,
          fmt("sigma_y(1 s) = %.4e (within 15%% of 2e-9), slope %.3f (in [-0.6, -0.4]), 1e5 samples in %.2f s", at1,
              slope, dt)};
}

// 9
Outcome chi2() {
  const double a = analysis::chi2_probability_to_exceed(1.07 * 33, 33);
  const double b = analysis::chi2_probability_to_exceed(1.7 * 33, 33);
  return {a >= 0.30 && a <= 0.40 && b >= 0.005 && b <= 0.02,
          fmt("PTE(1.07, 33) = %.4f (in [0.30, 0.40]), PTE(1.7, 33) = %.4f (in [0.005, 0.02])", a, b)};
}

const analysis::ModelFitReport* find(const analysis::ModelComparison& c, const std::string& name) {
  for (const auto& r : c.ranked)
    if (r.model == name) return &r;
  return nullptr;
}

// 10
Outcome discrimination() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = simulator::scenario_preset("sample_b");
  const simulator::Experiment exp(cfg);
  const auto acfg = analysis::analysis_config_from(cfg);
  const auto canon = analysis::analyze(exp.run(), acfg);
  const auto* d = find(canon.comparison, "drude");
  if (!d || !d->ok()) return {false, "drude fit missing or failed"};
  const bool vrms_ok = std::abs(d->vrms - cfg.vrms) <= 2.0 * d->vrms_sigma;
  const bool chi_ok = d->chi2_red >= 0.6 && d->chi2_red <= 1.5;
  info(fmt("seed %llu: V_rms = %.2f +- %.2f mV%s, V1 = %.2f +- %.2f mV", static_cast<unsigned long long>(cfg.seed),
           d->vrms * 1e3, d->vrms_sigma * 1e3, d->vrms_at_boundary ? " (at boundary)" : "", d->v1 * 1e3,
           d->v1_sigma * 1e3));
  int ranked = 0, covered = 0, chi_in = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto a = analysis::analyze(exp.run(seed), acfg);
    if (!a.comparison.ranked.empty() && a.comparison.ranked.front().model == "drude" &&
        a.comparison.ranked.front().ok())
      ++ranked;
    if (const auto* r = find(a.comparison, "drude"); r && r->ok()) {
      if (std::abs(r->vrms - cfg.vrms) <= 2.0 * r->vrms_sigma) ++covered;
      if (r->chi2_red >= 0.6 && r->chi2_red <= 1.5) ++chi_in;
    }
  }
  info(fmt("over seeds 1..100: V_rms within 2 sigma in %d, drude chi2_red in [0.6, 1.5] in %d", covered, chi_in));
  const double dt = seconds_since(t0);
  return {vrms_ok && chi_ok && ranked >= 90 && dt < 300.0,
          fmt("V_rms %s 2 sigma, drude chi2_red = %.3f, drude ranked first in %d/100 seeds (>= 90), %.1f s (< 300 s)",
              vrms_ok ? "within" : "OUTSIDE", d->chi2_red, ranked, dt)};
}

// 11
Outcome dominance() {
  bool ok = true;
  std::string detail;
  {
    const auto cfg = simulator::scenario_preset("sample_a");
    const simulator::Experiment exp(cfg);
    double worst = 1e300;
    int n = 0;
    for (double zs : cfg.z_setpoints) {
      const auto t = exp.truth(zs);
      if (t.z_physical < 500e-9) continue;
      worst = std::min(worst, std::abs(t.residual_gradient) / std::abs(t.casimir_gradient));
      ++n;
    }
    ok = ok && n > 0 && worst > 1.0;
    detail += fmt("sample_a min |F'_el/F'_cas| at z >= 500 nm = %.2f (%d setpoints)", worst, n);
  }
  {
    const auto cfg = simulator::scenario_preset("sample_b");
    const simulator::Experiment exp(cfg);
    double worst = 1e300;
    int n = 0;
    for (double zs : cfg.z_setpoints) {
      const auto t = exp.truth(zs);
      if (t.z_physical >= 400e-9) continue;
      worst = std::min(worst, std::abs(t.casimir_gradient) / std::abs(t.residual_gradient));
      ++n;
    }
    ok = ok && n > 0 && worst > 1.0;
    detail += fmt("; sample_b min |F'_cas/F'_el| below 400 nm = %.1f (%d setpoints)", worst, n);
  }
  return {ok, detail};
}

// 12
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CASIMIR_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("casimir_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "b.json") << R"({"preset": "sample_b", "series": {"n_samples": 4096}})";
  std::ofstream(root / "a.json") << R"({"preset": "sample_a", "sweep": {"n_repeats": 1}})";
  std::ofstream(root / "c.json") << R"({"geometry": {"sphere_radius_m": 4e-3}, "temperature_k": 293.15,
    "curve": {"models": ["drude", "plasma", "perfect_conductor"], "z_grid": {"z_min_m": 1e-7, "z_max_m": 2e-6, "n": 24}}})";
  const std::string b = (root / "b.json").string(), a = (root / "a.json").string(), c = (root / "c.json").string();
  std::vector<std::pair<std::string, std::function<std::string(const fs::path&)>>> cmds{
      {"curve", [&](const fs::path& o) { return "curve --config " + c + " --out " + o.string(); }},
      {"curve-json", [&](const fs::path& o) { return "curve --config " + c + " --format json --out " + o.string(); }},
      {"simulate", [&](const fs::path& o) { return "simulate --config " + b + " --seed 12 --out " + o.string(); }},
      {"fit",
       [&](const fs::path& o) {
         return "fit --config " + b + " --data " + (o / "records.csv").string() + " --out " + o.string();
       }},
      {"allan",
       [&](const fs::path& o) { return "allan --data " + (o / "series.csv").string() + " --out " + o.string(); }},
      {"kelvin-map", [&](const fs::path& o) { return "kelvin-map --config " + a + " --seed 3 --out " + o.string(); }},
  };
  std::size_t files = 0;
  std::string bad;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path out = root / (pass ? "second" : "first");
    fs::create_directories(out);
    for (const auto& [name, cmd] : cmds) {
      const int rc = run_cli(cmd(out), out / ("stdout_" + name + ".txt"));
      if (rc != 0) bad += " " + name + " exit " + std::to_string(rc);
    }
  }
  for (const auto& e : fs::directory_iterator(root / "first")) {
    ++files;
    if (slurp(e.path()) != slurp(root / "second" / e.path().filename()))
      bad += " " + e.path().filename().string() + " differs";
  }
  fs::remove_all(root);
  return {bad.empty() && files > 10,
          fmt("%zu outputs from %zu commands compared byte for byte%s", files, cmds.size(), bad.c_str())};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion(1, "ideal-conductor oracle", ideal_oracle);
  criterion(2, "plasma to ideal limit", plasma_limit);
  criterion(3, "drude TE zero-frequency term", te_zero);
  criterion(4, "classical-limit factor", classical_factor);
  criterion(5, "derivative consistency", derivatives);
  criterion(6, "parabola exactness", parabola);
  criterion(7, "calibration round trip", calibration);
  criterion(8, "allan estimator", allan);
  criterion(9, "chi-square statistics", chi2);
  criterion(10, "end-to-end model discrimination", discrimination);
  criterion(11, "residual-force dominance contrast", dominance);
  criterion(12, "determinism", determinism);
  std::printf("%d of 12 criteria failed [%.1f s total]\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
