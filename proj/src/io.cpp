#include "casimir/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "casimir/error.hpp"

namespace casimir::io {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
    out.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no, const char* column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    std::ostringstream os;
    os << "line " << line_no << ": column " << column << ": not a finite number '" << s << "'";
    throw ConfigError(os.str());
  }
  return v;
}

std::string header_line(std::initializer_list<const char*> cols) {
  std::string h;
  for (const char* c : cols) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h + '\n';
}

void expect_header(const std::vector<std::string>& lines, const std::string& want, const char* what) {
  if (lines.empty()) throw ConfigError(std::string(what) + ": empty file");
  std::string got;
  for (const auto& c : split(lines.front(), ',')) got += (got.empty() ? "" : ",") + c;
  std::string w = want;
  if (!w.empty() && w.back() == '\n') w.pop_back();
  if (got != w)
    throw ConfigError(std::string(what) + ": expected header '" + w + "', found '" + got + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

static const std::string kRecordHeader = header_line({"run_id", "direction", "z_m", "V", "f_Hz"});

std::string records_csv(std::span<const simulator::SweepRecord> records) {
  std::string out = kRecordHeader;
  for (const auto& r : records) {
    out += std::to_string(r.run_id);
    out += ',';
    out += simulator::to_string(r.direction);
    out += ',' + format_double(r.z_setpoint) + ',' + format_double(r.applied_v) + ',' +
           format_double(r.measured_f) + '\n';
  }
  return out;
}

std::string records_jsonl(std::span<const simulator::SweepRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += "{\"run_id\":" + std::to_string(r.run_id) + ",\"direction\":\"" +
           std::string(simulator::to_string(r.direction)) + "\",\"z_m\":" + format_double(r.z_setpoint) +
           ",\"V\":" + format_double(r.applied_v) + ",\"f_Hz\":" + format_double(r.measured_f) + "}\n";
  }
  return out;
}

std::vector<simulator::SweepRecord> parse_records(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ConfigError("records: empty file");
  std::vector<simulator::SweepRecord> out;
  if (lines.front().front() == '{') {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string where = "records line " + std::to_string(i + 1);
      json j;
      try {
        j = json::parse(lines[i]);
      } catch (const json::parse_error&) {
        throw ConfigError(where + ": not valid JSON");
      }
      if (!j.is_object() || j.size() != 5) throw ConfigError(where + ": expected run_id, direction, z_m, V, f_Hz");
      simulator::SweepRecord r;
      try {
        r.run_id = j.at("run_id").get<int>();
        r.direction = simulator::direction_from_string(j.at("direction").get<std::string>());
        r.z_setpoint = j.at("z_m").get<double>();
        r.applied_v = j.at("V").get<double>();
        r.measured_f = j.at("f_Hz").get<double>();
      } catch (const json::exception&) {
        throw ConfigError(where + ": expected run_id, direction, z_m, V, f_Hz");
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
      out.push_back(r);
    }
    return out;
  }
  expect_header(lines, kRecordHeader, "records");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 5)
      throw ConfigError("records line " + std::to_string(i + 1) + ": expected 5 columns");
    simulator::SweepRecord r;
    const double id = parse_double(cells[0], i + 1, "run_id");
    if (id != std::floor(id)) throw ConfigError("records line " + std::to_string(i + 1) + ": run_id must be an integer");
    r.run_id = static_cast<int>(id);
    try {
      r.direction = simulator::direction_from_string(cells[1]);
    } catch (const ConfigError& e) {
      throw ConfigError("records line " + std::to_string(i + 1) + ": " + e.what());
    }
    r.z_setpoint = parse_double(cells[2], i + 1, "z_m");
    r.applied_v = parse_double(cells[3], i + 1, "V");
    r.measured_f = parse_double(cells[4], i + 1, "f_Hz");
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError("records: no data rows");
  return out;
}

std::vector<simulator::SweepRecord> read_records(const std::filesystem::path& path) {
  try {
    return parse_records(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string curve_csv(const lifshitz::ForceCurve& c) {
  std::string out = header_line({"z_m", "value", "d1", "d3"});
  for (std::size_t i = 0; i < c.size(); ++i)
    out += format_double(c.z[i]) + ',' + format_double(c.value[i]) + ',' + format_double(c.d1[i]) +
           ',' + format_double(c.d3[i]) + '\n';
  return out;
}

json curve_json(const lifshitz::ForceCurve& c) {
  json j;
  j["model"] = c.model;
  j["temperature_k"] = c.temperature ? *c.temperature : 0.0;
  j["geometry"] = {{"sphere_radius_m", c.geometry.sphere_radius},
                   {"configuration", c.geometry.configuration == lifshitz::Configuration::PlatePlate
                                         ? "plate_plate"
                                         : "sphere_plate_pfa"}};
  j["units"] = {{"z", "m"}, {"value", "N"}, {"d1", "N/m"}, {"d3", "N/m^3"}};
  j["z_m"] = c.z;
  j["value"] = c.value;
  j["d1"] = c.d1;
  j["d3"] = c.d3;
  return j;
}

std::string series_csv(std::span<const double> f, double dt) {
  std::string out = header_line({"t_s", "f_Hz"});
  for (std::size_t i = 0; i < f.size(); ++i)
    out += format_double(static_cast<double>(i) * dt) + ',' + format_double(f[i]) + '\n';
  return out;
}

Series parse_series(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, header_line({"t_s", "f_Hz"}), "series");
  Series s;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 2) throw ConfigError("series line " + std::to_string(i + 1) + ": expected 2 columns");
    s.t.push_back(parse_double(cells[0], i + 1, "t_s"));
    s.f.push_back(parse_double(cells[1], i + 1, "f_Hz"));
  }
  return s;
}

Series read_series(const std::filesystem::path& path) {
  try {
    return parse_series(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double sample_interval(const Series& s) {
  if (s.t.size() < 2)
    throw InsufficientDataError("series: need at least 2 samples (have " + std::to_string(s.t.size()) +
                                "); maximum valid tau is undefined");
  double dt = (s.t.back() - s.t.front()) / static_cast<double>(s.t.size() - 1);
  // Time stamps carry decimal round-off; snap to 12 significant digits.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", dt);
  dt = std::strtod(buf, nullptr);
  if (!(dt > 0.0)) throw ConfigError("series: time column must increase");
  for (std::size_t i = 1; i < s.t.size(); ++i) {
    const double step = s.t[i] - s.t[i - 1];
    if (std::abs(step - dt) > 1e-6 * dt) throw ConfigError("series: samples are not evenly spaced");
  }
  return dt;
}

std::string allan_csv(std::span<const analysis::AllanPoint> table) {
  std::string out = header_line({"tau_s", "sigma_y", "n_blocks"});
  for (const auto& p : table)
    out += format_double(p.tau) + ',' + format_double(p.sigma_y) + ',' + std::to_string(p.n_blocks) + '\n';
  return out;
}

json allan_json(std::span<const analysis::AllanPoint> table) {
  json rows = json::array();
  for (const auto& p : table) rows.push_back({{"tau_s", p.tau}, {"sigma_y", p.sigma_y}, {"n_blocks", p.n_blocks}});
  return {{"statistic", "allan_deviation"}, {"points", rows}};
}

std::string kelvin_csv(const simulator::KelvinGrid& g) {
  std::string out = header_line({"x_m", "y_m", "V_m"});
  for (std::size_t j = 0; j < g.y.size(); ++j)
    for (std::size_t i = 0; i < g.x.size(); ++i)
      out += format_double(g.x[i]) + ',' + format_double(g.y[j]) + ',' +
             format_double(g.vm[j * g.x.size() + i]) + '\n';
  return out;
}

std::string patch_map_csv(const electrostatics::PatchMap& m) {
  std::string out = header_line({"x_m", "y_m", "V"});
  for (std::size_t j = 0; j < m.ny; ++j)
    for (std::size_t i = 0; i < m.nx; ++i)
      out += format_double(static_cast<double>(i) * m.spacing) + ',' +
             format_double(static_cast<double>(j) * m.spacing) + ',' + format_double(m.at(i, j)) + '\n';
  return out;
}

json patch_map_json(const electrostatics::PatchMap& m) {
  return {{"nx", m.nx},
          {"ny", m.ny},
          {"spacing_m", m.spacing},
          {"correlation_length_m", m.correlation_length},
          {"rms_v", m.rms_amplitude},
          {"mean_v", m.mean_offset},
          {"seed", m.seed},
          {"sample_rms_v", m.sample_rms()},
          {"estimated_correlation_length_m", electrostatics::estimate_correlation_length(m)}};
}

std::string vm_profile_csv(const electrostatics::VmProfile& vm) {
  std::string out = header_line({"z_m", "vm_v"});
  if (vm.is_constant()) return out + "0," + format_double(vm.value(1.0)) + '\n';
  const auto& z = vm.z();
  for (std::size_t i = 0; i < z.size(); ++i) out += format_double(z[i]) + ',' + format_double(vm.value(z[i])) + '\n';
  return out;
}

std::string residuals_csv(const analysis::ModelFitReport& r) {
  std::string out = header_line({"z_m", "f0_meas", "f0_model", "residual", "sigma"});
  for (const auto& p : r.residuals)
    out += format_double(p.z) + ',' + format_double(p.f0_meas) + ',' + format_double(p.f0_model) + ',' +
           format_double(p.residual) + ',' + format_double(p.sigma) + '\n';
  return out;
}

std::string setpoints_csv(std::span<const analysis::SetpointSummary> sp) {
  std::string out = header_line({"z_setpoint_m", "z_electrostatic_m", "z_physical_m", "f0_hz", "f0_sigma_hz",
                                 "kp_hz2_per_v2", "kp_sigma", "vm_v", "vm_sigma_v", "n_points"});
  for (const auto& s : sp) {
    const auto& p = s.parabola;
    out += format_double(s.z_setpoint) + ',' + format_double(s.z_electrostatic) + ',' +
           format_double(s.z_physical) + ',' + format_double(p.f0) + ',' + format_double(p.f0_sigma()) + ',' +
           format_double(p.kp) + ',' + format_double(p.kp_sigma()) + ',' + format_double(p.vm) + ',' +
           format_double(p.vm_sigma()) + ',' + std::to_string(p.n_points) + '\n';
  }
  return out;
}

json report_json(const analysis::ModelFitReport& r) {
  json j;
  j["model"] = r.model;
  if (!r.ok()) {
    j["error"] = r.error;
    j["exit_code"] = r.error_exit_code;
    return j;
  }
  j["v1_v"] = r.v1;
  j["v1_sigma_v"] = r.v1_sigma;
  j["vrms_v"] = r.vrms;
  j["vrms_sigma_v"] = r.vrms_sigma;
  j["vrms_at_boundary"] = r.vrms_at_boundary;
  j["chi2"] = r.chi2;
  j["dof"] = r.dof;
  j["chi2_red"] = r.chi2_red;
  j["probability_to_exceed"] = r.probability_to_exceed;
  j["unit_weights"] = r.unit_weights;
  j["iterations"] = r.iterations;
  json res = json::array();
  for (const auto& p : r.residuals)
    res.push_back({{"z_m", p.z}, {"f0_meas", p.f0_meas}, {"f0_model", p.f0_model},
                   {"residual", p.residual}, {"sigma", p.sigma}});
  j["residuals"] = res;
  return j;
}

json analysis_json(const analysis::AnalysisResult& a) {
  json j;
  const auto& c = a.calibration;
  j["calibration"] = {{"k_eff_n_per_m", c.k_eff},   {"k_eff_sigma", c.k_eff_sigma},
                      {"z_off_m", c.z_off},         {"z_off_sigma_m", c.z_off_sigma},
                      {"chi2_red", c.chi2_red},     {"n_points", c.n_points},
                      {"iterations", c.iterations}, {"contact_warning", c.contact_warning}};
  json models = json::array();
  for (const auto& r : a.comparison.ranked) models.push_back(report_json(r));
  j["models"] = models;
  j["verdict"] = a.comparison.verdict;
  j["warnings"] = a.warnings;
  j["n_setpoints"] = a.setpoints.size();
  return j;
}

std::string analysis_text(const analysis::AnalysisResult& a) {
  std::ostringstream os;
  char buf[256];
  const auto& c = a.calibration;
  std::snprintf(buf, sizeof buf, "calibration: k_eff = %.6g +- %.2g N/m, z_off = %.6g +- %.2g nm, chi2_red = %.3f\n",
                c.k_eff, c.k_eff_sigma, c.z_off * 1e9, c.z_off_sigma * 1e9, c.chi2_red);
  os << buf << "setpoints: " << a.setpoints.size() << "\n\n";
  std::snprintf(buf, sizeof buf, "%-20s %10s %10s %10s %10s %10s %4s %9s %10s\n", "model", "V1 [mV]", "+-",
                "Vrms [mV]", "+-", "chi2", "dof", "chi2_red", "PTE");
  os << buf;
  for (const auto& r : a.comparison.ranked) {
    if (!r.ok()) {
      os << r.model << ": fit failed: " << r.error << '\n';
      continue;
    }
    std::snprintf(buf, sizeof buf, "%-20s %10.4f %10.4f %10.4f %10.4f %10.4g %4d %9.4f %10.4g%s\n",
                  r.model.c_str(), r.v1 * 1e3, r.v1_sigma * 1e3, r.vrms * 1e3, r.vrms_sigma * 1e3, r.chi2,
                  r.dof, r.chi2_red, r.probability_to_exceed, r.vrms_at_boundary ? "  (Vrms at 0)" : "");
    os << buf;
  }
  os << '\n' << a.comparison.verdict << '\n';
  for (const auto& w : a.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace casimir::io
