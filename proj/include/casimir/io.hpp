#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/analysis.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/simulator.hpp"

namespace casimir::io {

using nlohmann::json;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Sweep records: CSV (run_id,direction,z_m,V,f_Hz) or JSON lines.
std::string records_csv(std::span<const simulator::SweepRecord> records);
std::string records_jsonl(std::span<const simulator::SweepRecord> records);
/// Either format, detected from the content. Anything else is a ConfigError.
std::vector<simulator::SweepRecord> parse_records(const std::string& text);
std::vector<simulator::SweepRecord> read_records(const std::filesystem::path& path);

// Casimir curves: CSV (z_m,value,d1,d3) or JSON with metadata.
std::string curve_csv(const lifshitz::ForceCurve& curve);
json curve_json(const lifshitz::ForceCurve& curve);

// Frequency series: CSV (t_s,f_Hz).
struct Series {
  std::vector<double> t;
  std::vector<double> f;
};
std::string series_csv(std::span<const double> f, double sample_interval);
Series parse_series(const std::string& text);
Series read_series(const std::filesystem::path& path);
/// Sample interval of an evenly spaced time column.
double sample_interval(const Series& s);

std::string allan_csv(std::span<const analysis::AllanPoint> table);
json allan_json(std::span<const analysis::AllanPoint> table);

std::string kelvin_csv(const simulator::KelvinGrid& grid);
std::string patch_map_csv(const electrostatics::PatchMap& map);
json patch_map_json(const electrostatics::PatchMap& map);
std::string vm_profile_csv(const electrostatics::VmProfile& vm);

std::string residuals_csv(const analysis::ModelFitReport& report);
std::string setpoints_csv(std::span<const analysis::SetpointSummary> setpoints);

json report_json(const analysis::ModelFitReport& report);
json analysis_json(const analysis::AnalysisResult& result);
std::string analysis_text(const analysis::AnalysisResult& result);

}  // namespace casimir::io
