#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/analysis.hpp"
#include "casimir/simulator.hpp"

namespace casimir::config {

using nlohmann::json;

struct CurveRequest {
  std::vector<std::pair<std::string, materials::PermittivityModel>> models;
  std::vector<double> z;  // m
};

struct SweepSection {
  std::vector<double> z_setpoints;
  std::vector<std::vector<double>> voltages;
  double voltage_step = 0.1;
  std::optional<double> vm_guess;
  int n_repeats = 10;
  double z_off = 0.0;
  double position_jitter = 0.0;
};

struct ElectrostaticsSection {
  double v1 = 0.0;
  double vrms = 0.0;
  simulator::VmSource vm;
};

/// One parsed configuration document. Sections are optional at parse time;
/// the accessors below demand what each command needs.
struct Document {
  json effective;  // after preset merge
  std::string name = "custom";
  std::uint64_t seed = 0;
  std::optional<lifshitz::Geometry> geometry;
  std::optional<std::optional<double>> temperature;  // inner nullopt: T = 0
  std::optional<resonator::ResonatorParams> resonator;
  std::optional<std::optional<materials::PermittivityModel>> model;  // inner nullopt: none
  std::optional<SweepSection> sweep;
  std::optional<ElectrostaticsSection> electrostatics;
  std::optional<resonator::NoiseSpec> noise;
  std::optional<simulator::KelvinScanSpec> kelvin;
  std::optional<simulator::SeriesSpec> series;
  std::vector<std::pair<std::string, materials::PermittivityModel>> candidates;
  std::optional<CurveRequest> curve;
  std::optional<double> sigma_override;
  int vm_smoothing_degree = 0;
  std::vector<double> allan_taus;
};

/// Parse a document. Unknown keys anywhere fail with their JSON path. A
/// top-level "preset" names a built-in scenario that the rest of the
/// document patches (RFC 7386 merge).
Document parse(const json& doc);
Document load(const std::filesystem::path& path);

simulator::ExperimentConfig experiment(const Document& doc);
analysis::AnalysisConfig analysis_config(const Document& doc);
CurveRequest curve_request(const Document& doc);
/// Patch source for Kelvin maps, from electrostatics.vm.patch_map.
simulator::PatchSource patch_source(const Document& doc);

/// Full document form of an experiment, in the schema `parse` accepts.
json to_json(const simulator::ExperimentConfig& cfg);
json model_to_json(const materials::PermittivityModel& m);
materials::PermittivityModel model_from_json(const json& j, const std::string& path);

}  // namespace casimir::config
