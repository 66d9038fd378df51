#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "casimir/electrostatics.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/resonator.hpp"
#include "casimir/simulator.hpp"

namespace casimir::analysis {

struct VoltagePoint {
  double v;  // V
  double f;  // Hz
};

struct ParabolaFitResult {
  double f0 = 0.0;  // Hz
  double kp = 0.0;  // Hz^2/V^2
  double vm = 0.0;  // V; NaN when the curvature is non-physical
  /// Covariance of (f0, kp, vm), from the residual scatter of the fit.
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  std::size_t n_points = 0;
  double residual_rms = 0.0;  // Hz, of f
  /// Set when the fitted K_p <= 0 (flat or upward parabola).
  bool nonphysical_curvature = false;

  double f0_sigma() const { return std::sqrt(covariance(0, 0)); }
  double kp_sigma() const { return std::sqrt(covariance(1, 1)); }
  double vm_sigma() const { return std::sqrt(covariance(2, 2)); }
};

/// Least-squares fit of f^2 = f0^2 - K_p (V - V_m)^2. Needs at least three
/// distinct voltages; exactly three points interpolate.
ParabolaFitResult fit_parabola(std::span<const VoltagePoint> points);
/// Weighted variant: `sigma` holds the standard deviation of each f, and the
/// covariance is taken from the weights alone rather than the scatter.
ParabolaFitResult fit_parabola(std::span<const VoltagePoint> points, std::span<const double> sigma);
/// Per-point sigma from the sample spread of replicate measurements at each
/// voltage. Empty when some voltage has fewer than two readings or no spread.
std::vector<double> replicate_sigmas(std::span<const VoltagePoint> points);

struct KpSample {
  double z;           // setpoint, m
  double kp;          // Hz^2/V^2
  double sigma = 0.0; // 0 for every sample selects relative weighting
};

struct CalibrationResult {
  double k_eff = 0.0;  // N/m
  double z_off = 0.0;  // m
  double k_eff_sigma = 0.0;
  double z_off_sigma = 0.0;
  double chi2_red = 0.0;
  std::size_t n_points = 0;
  int iterations = 0;
  /// Straight-line extrapolation of 1/sqrt(K_p) reaches zero at or beyond
  /// the closest setpoint.
  bool contact_warning = false;
};

/// Fit K_p(z) = eps0 pi R f_m^2 / (k_eff (z - z_off)^2). The straight line
/// 1/sqrt(K_p) against z seeds a Levenberg-Marquardt refinement.
CalibrationResult calibrate_kp(std::span<const KpSample> samples, double radius, double f_m);

struct AllanPoint {
  double tau;      // s
  double sigma_y;  // Allan deviation
  std::size_t n_blocks;
};

/// Non-overlapping Allan deviation of y_k = f_k / <f> - 1. Each tau must be
/// a whole multiple of the sample interval.
std::vector<AllanPoint> allan_deviation(std::span<const double> series, double sample_interval,
                                        std::span<const double> taus);
/// tau0 * 2^k for every k with at least two blocks in n samples.
std::vector<double> octave_taus(std::size_t n_samples, double sample_interval);
/// Least-squares slope of log sigma_y against log tau (zero points skipped).
double loglog_slope(std::span<const AllanPoint> table);

/// Regularized upper incomplete gamma function Q(a, x).
double regularized_gamma_q(double a, double x);
/// Survival function of the chi-square distribution, Q(dof/2, chi2/2).
double chi2_probability_to_exceed(double chi2, int dof);

struct VmSample {
  double z;      // m
  double vm;     // V
  double sigma;  // V, 0 for unweighted
};

/// Weighted polynomial in ln z through measured V_m values, tabulated on a
/// log grid spanning the samples.
electrostatics::VmProfile smooth_vm_profile(std::span<const VmSample> samples, int degree = 2,
                                            std::size_t grid_points = 64);

/// Lowest polynomial degree (>= 1) whose weighted fit of the samples has an
/// acceptable reduced chi-square; 2 for unweighted samples.
int auto_vm_degree(std::span<const VmSample> samples, int max_degree = 8);

struct ShiftPoint {
  double z;      // corrected gap, m
  double f0;     // Hz
  double sigma;  // Hz; 0 for every point fits with unit weights
};

struct ResidualPoint {
  double z, f0_meas, f0_model, residual, sigma;
};

struct ModelFitReport {
  std::string model;
  double v1 = 0.0, vrms = 0.0;
  double v1_sigma = 0.0, vrms_sigma = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  double chi2_red = 0.0;
  double probability_to_exceed = 0.0;
  /// V_rms^2 pinned at zero by the non-negativity constraint.
  bool vrms_at_boundary = false;
  bool unit_weights = false;
  int iterations = 0;
  std::vector<ResidualPoint> residuals;
  /// Non-empty when the fit failed; the numeric fields are then meaningless.
  std::string error;
  int error_exit_code = 0;

  bool ok() const { return error.empty(); }
};

/// Fit (V1, V_rms) of the residual patch force to measured f0(z) with the
/// Casimir curve held fixed.
ModelFitReport fit_residual_potential(std::span<const ShiftPoint> data,
                                      const electrostatics::VmProfile& vm,
                                      const resonator::ResonatorParams& resonator,
                                      const lifshitz::Geometry& geometry,
                                      const lifshitz::ForceCurve& casimir_curve,
                                      std::string model_tag);

struct Candidate {
  std::string name;
  const lifshitz::ForceCurve* curve;
};

struct ModelComparison {
  std::vector<ModelFitReport> ranked;  // best first
  std::string verdict;
};

/// Fit every candidate and rank by probability to exceed (ties keep input
/// order). Failed fits are kept, ranked last.
ModelComparison compare_models(std::span<const ShiftPoint> data,
                               const electrostatics::VmProfile& vm,
                               const resonator::ResonatorParams& resonator,
                               const lifshitz::Geometry& geometry,
                               std::span<const Candidate> candidates);

struct SetpointSummary {
  double z_setpoint;
  double z_electrostatic;
  double z_physical;
  ParabolaFitResult parabola;
};

struct AnalysisConfig {
  lifshitz::Geometry geometry;
  std::optional<double> temperature = 293.15;
  /// f_m, Q and A_rms are used as given; k_eff is replaced by the calibration.
  resonator::ResonatorParams resonator{resonator::kDefaultFm, 4000.0, 14000.0, 10e-9};
  std::vector<std::pair<std::string, materials::PermittivityModel>> candidates;
  /// Replaces the per-point f0 uncertainty when set.
  std::optional<double> sigma_override;
  /// Polynomial degree in ln z for the V_m profile; 0 picks it from the data.
  int vm_smoothing_degree = 0;
};

struct AnalysisResult {
  std::vector<SetpointSummary> setpoints;  // decreasing z
  CalibrationResult calibration;
  electrostatics::VmProfile vm = electrostatics::VmProfile::constant(0.0);
  std::vector<ShiftPoint> shifts;
  ModelComparison comparison;
  std::vector<std::string> warnings;
};

/// Parabola fits per setpoint, K_p calibration, V_m smoothing and model
/// comparison. `curves` may supply precomputed Casimir curves, one per
/// candidate in order; missing ones are computed over the data range.
AnalysisResult analyze(std::span<const simulator::SweepRecord> records, const AnalysisConfig& cfg,
                       std::span<const lifshitz::ForceCurve> curves = {});

AnalysisConfig analysis_config_from(const simulator::ExperimentConfig& cfg);

}  // namespace casimir::analysis
