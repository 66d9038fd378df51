#include "casimir/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "casimir/error.hpp"
#include "casimir/materials.hpp"

namespace casimir::electrostatics {

namespace k = materials::constants;

namespace {
void check_geometry(double radius, double z) {
  if (!(z > 0.0)) throw DomainError("electrostatics: z must be > 0");
  if (!(radius > 0.0)) throw DomainError("electrostatics: sphere radius must be > 0");
  if (z / radius > 0.1) {
    std::ostringstream os;
    os << "electrostatics: proximity limit invalid, z/R = " << z / radius << " > 0.1";
    throw DomainError(os.str());
  }
}
}  // namespace

double sphere_plate_electrostatic_force(double radius, double z, double dv) {
  check_geometry(radius, z);
  return -k::pi * k::epsilon_0 * radius * dv * dv / z;
}

double sphere_plate_electrostatic_gradient(double radius, double z, double dv) {
  check_geometry(radius, z);
  return -k::pi * k::epsilon_0 * radius * dv * dv / (z * z);
}

double kp_model(double z, double radius, double f_m, double k_eff, double z_off) {
  if (!(z > z_off)) throw DomainError("kp_model: requires z > z_off");
  if (!(k_eff > 0.0)) throw DomainError("kp_model: k_eff must be > 0");
  const double gap = z - z_off;
  return k::epsilon_0 * k::pi * radius * f_m * f_m / (k_eff * gap * gap);
}

VmProfile VmProfile::constant(double vm) {
  VmProfile p;
  p.constant_ = vm;
  return p;
}

VmProfile VmProfile::table(std::vector<double> z, std::vector<double> vm) {
  VmProfile p;
  p.spline_.emplace(z, vm);
  return p;
}

bool VmProfile::contains(double z) const { return !spline_ || spline_->contains(z); }

double VmProfile::value(double z) const {
  if (!spline_) return constant_ + offset_;
  if (!spline_->contains(z)) {
    std::ostringstream os;
    os << "V_m profile does not cover z = " << z << " m (extrapolation refused)";
    throw BoundsError(os.str());
  }
  return spline_->value(z) + offset_;
}

double VmProfile::derivative(double z) const {
  if (!spline_) return 0.0;
  if (!spline_->contains(z)) {
    std::ostringstream os;
    os << "V_m profile does not cover z = " << z << " m (extrapolation refused)";
    throw BoundsError(os.str());
  }
  return spline_->derivative(z);
}

VmProfile VmProfile::shifted(double dv) const {
  VmProfile p = *this;
  p.offset_ += dv;
  return p;
}

const std::vector<double>& VmProfile::z() const {
  static const std::vector<double> empty;
  return spline_ ? spline_->knots() : empty;
}

const std::vector<double>& VmProfile::vm() const {
  static const std::vector<double> empty;
  return spline_ ? spline_->values() : empty;
}

double residual_force(double z, const ElectrostaticEnv& env, int order) {
  if (!(env.vrms >= 0.0)) throw DomainError("residual_force: Vrms must be >= 0");
  const double u = env.vm.value(z) + env.v1;
  const double s = u * u + env.vrms * env.vrms;
  if (order == 0) return sphere_plate_electrostatic_force(env.radius, z, std::sqrt(s));
  if (order == 1) {
    check_geometry(env.radius, z);
    const double ds = 2.0 * u * env.vm.derivative(z);
    return k::pi * env.radius * k::epsilon_0 * (ds / z - s / (z * z));
  }
  throw DomainError("residual_force: order must be 0 or 1");
}

double PatchMap::sample_mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double PatchMap::sample_rms() const {
  const double m = sample_mean();
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return values.empty() ? 0.0 : std::sqrt(s / static_cast<double>(values.size()));
}

PatchMap generate_patch_map(std::size_t nx, std::size_t ny, double spacing,
                            double correlation_length, double rms, double mean,
                            std::uint64_t seed) {
  if (nx < 2 || ny < 2) throw ConfigError("patch map needs at least 2x2 cells");
  if (!(spacing > 0.0)) throw ConfigError("patch map spacing must be > 0");
  if (!(correlation_length >= spacing))
    throw ConfigError("patch map correlation length must be >= spacing");
  if (!(rms >= 0.0)) throw ConfigError("patch map rms must be >= 0");
  if (!std::isfinite(mean)) throw ConfigError("patch map mean must be finite");

  PatchMap map;
  map.nx = nx;
  map.ny = ny;
  map.spacing = spacing;
  map.correlation_length = correlation_length;
  map.rms_amplitude = rms;
  map.mean_offset = mean;
  map.seed = seed;
  map.values.assign(nx * ny, mean);
  if (rms == 0.0) return map;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(nx * ny);
  for (double& w : white) w = normal(rng);

  // Smoothing with a Gaussian of width l/sqrt(2) gives correlation
  // exp(-r^2 / (2 l^2)); separable, applied along x then y with wrap-around.
  const double sigma = correlation_length / std::sqrt(2.0) / spacing;  // in cells
  const long half = static_cast<long>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  for (long d = -half; d <= half; ++d)
    kernel[static_cast<std::size_t>(d + half)] =
        std::exp(-0.5 * static_cast<double>(d * d) / (sigma * sigma));

  auto wrap = [](long i, std::size_t n) {
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
  };
  std::vector<double> tmp(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (long d = -half; d <= half; ++d)
        acc += kernel[static_cast<std::size_t>(d + half)] *
               white[j * nx + wrap(static_cast<long>(i) + d, nx)];
      tmp[j * nx + i] = acc;
    }
  std::vector<double> field(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (long d = -half; d <= half; ++d)
        acc += kernel[static_cast<std::size_t>(d + half)] *
               tmp[wrap(static_cast<long>(j) + d, ny) * nx + i];
      field[j * nx + i] = acc;
    }

  double m = 0.0;
  for (double v : field) m += v;
  m /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field) var += (v - m) * (v - m);
  const double sd = std::sqrt(var / static_cast<double>(field.size()));
  for (std::size_t c = 0; c < field.size(); ++c)
    map.values[c] = mean + rms * (field[c] - m) / sd;
  return map;
}

double vm_from_patches(const PatchMap& map, double x, double y, double z, double radius,
                       double footprint_radius) {
  if (!(z > 0.0)) throw DomainError("vm_from_patches: z must be > 0");
  if (!(radius > 0.0)) throw DomainError("vm_from_patches: sphere radius must be > 0");
  if (!(footprint_radius > 0.0)) throw DomainError("vm_from_patches: footprint radius must be > 0");
  const double eps = 1e-9 * map.spacing;
  if (x - footprint_radius < -eps || y - footprint_radius < -eps ||
      x + footprint_radius > map.width() + eps || y + footprint_radius > map.height() + eps) {
    std::ostringstream os;
    os << "sphere footprint (x=" << x << ", y=" << y << ", r=" << footprint_radius
       << ") leaves the patch map [0, " << map.width() << "] x [0, " << map.height() << "]";
    throw BoundsError(os.str());
  }
  const double h = map.spacing;
  const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil((x - footprint_radius) / h - 1e-9)));
  const auto i1 = std::min(map.nx - 1, static_cast<std::size_t>(std::floor((x + footprint_radius) / h + 1e-9)));
  const auto j0 = static_cast<std::size_t>(std::max(0.0, std::ceil((y - footprint_radius) / h - 1e-9)));
  const auto j1 = std::min(map.ny - 1, static_cast<std::size_t>(std::floor((y + footprint_radius) / h + 1e-9)));
  const double r2max = footprint_radius * footprint_radius;
  const double inv_2r = 0.5 / radius;
  double wsum = 0.0, vsum = 0.0;
  for (std::size_t j = j0; j <= j1; ++j) {
    const double dy = static_cast<double>(j) * h - y;
    for (std::size_t i = i0; i <= i1; ++i) {
      const double dx = static_cast<double>(i) * h - x;
      const double r2 = dx * dx + dy * dy;
      if (r2 > r2max) continue;
      const double w = 1.0 / (z + r2 * inv_2r);
      wsum += w;
      vsum += w * map.at(i, j);
    }
  }
  if (wsum == 0.0) throw BoundsError("vm_from_patches: footprint contains no lattice points");
  return vsum / wsum;
}

double estimate_correlation_length(const PatchMap& map) {
  const double m = map.sample_mean();
  const std::size_t max_lag = std::min(map.nx, map.ny) / 2;
  std::vector<double> corr(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t j = 0; j < map.ny; ++j)
      for (std::size_t i = 0; i < map.nx; ++i) {
        const double v = map.at(i, j) - m;
        acc += v * (map.at((i + lag) % map.nx, j) - m);
        acc += v * (map.at(i, (j + lag) % map.ny) - m);
      }
    corr[lag] = acc;
  }
  if (corr[0] == 0.0) return 0.0;
  const double target = std::exp(-0.5);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const double c0 = corr[lag - 1] / corr[0], c1 = corr[lag] / corr[0];
    if (c1 <= target) {
      const double t = (c0 - target) / (c0 - c1);
      return (static_cast<double>(lag - 1) + t) * map.spacing;
    }
  }
  return static_cast<double>(max_lag) * map.spacing;
}

}  // namespace casimir::electrostatics
