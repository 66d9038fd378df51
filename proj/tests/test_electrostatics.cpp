#include <doctest.h>

#include <cmath>

#include "casimir/electrostatics.hpp"
#include "casimir/error.hpp"
#include "casimir/materials.hpp"

using namespace casimir;
using namespace casimir::electrostatics;
namespace c = casimir::materials::constants;

TEST_CASE("sphere-plate electrostatic force") {
  const double f = sphere_plate_electrostatic_force(4e-3, 1e-6, 1.0);
  CHECK(f < 0.0);
  CHECK(std::abs(f) == doctest::Approx(1.11e-7).epsilon(2e-3));
  CHECK(std::abs(f) == doctest::Approx(c::pi * c::epsilon_0 * 4e-3 / 1e-6).epsilon(1e-14));
  CHECK(sphere_plate_electrostatic_force(4e-3, 1e-6, 0.0) == 0.0);
  CHECK(sphere_plate_electrostatic_force(4e-3, 1e-6, 4.0) == doctest::Approx(16.0 * f));
  CHECK(sphere_plate_electrostatic_gradient(4e-3, 1e-6, 1.0) == doctest::Approx(f / 1e-6));
  CHECK_THROWS_AS(sphere_plate_electrostatic_force(4e-3, 1e-3, 1.0), DomainError);
  CHECK_THROWS_AS(sphere_plate_electrostatic_force(4e-3, 0.0, 1.0), DomainError);
}

TEST_CASE("calibration curvature") {
  const double kp = kp_model(1.05e-6, 4e-3, 1e5, 4000.0, 50e-9);
  CHECK(kp == doctest::Approx(2.78e5).epsilon(2e-3));
  CHECK(kp_model(0.55e-6, 4e-3, 1e5, 4000.0, 50e-9) == doctest::Approx(4.0 * kp));
  CHECK(kp_model(1.05e-6, 8e-3, 1e5, 4000.0, 50e-9) == doctest::Approx(2.0 * kp));
  for (double z : {0.2e-6, 0.7e-6, 3e-6}) {
    const double gap = z - 50e-9;
    CHECK(kp_model(z, 4e-3, 1e5, 4000.0, 50e-9) * 4000.0 * gap * gap /
              (c::epsilon_0 * c::pi * 4e-3 * 1e10) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(kp_model(50e-9, 4e-3, 1e5, 4000.0, 50e-9), DomainError);
}

TEST_CASE("residual force") {
  ElectrostaticEnv env;
  env.v1 = 0.3;
  env.vm = VmProfile::constant(-0.3);
  CHECK(residual_force(1e-6, env) == 0.0);
  env.vrms = 0.14;
  const double fa = residual_force(1e-6, env);
  CHECK(std::abs(fa) == doctest::Approx(2.18e-9).epsilon(5e-3));
  env.vrms = 0.0116;
  CHECK(residual_force(1e-6, env) / fa == doctest::Approx(std::pow(0.0116 / 0.14, 2)).epsilon(1e-12));

  ElectrostaticEnv e2;
  e2.v1 = 0.02;
  e2.vrms = 0.01;
  e2.vm = VmProfile::table({1e-7, 5e-7, 1e-6, 2e-6}, {0.1, 0.12, 0.13, 0.135});
  for (double z : {2e-7, 8e-7, 1.5e-6}) {
    const double s = std::pow(e2.vm.value(z) + e2.v1, 2) + e2.vrms * e2.vrms;
    CHECK(residual_force(z, e2) == doctest::Approx(sphere_plate_electrostatic_force(4e-3, z, std::sqrt(s))));
    CHECK(std::abs(residual_force(z, e2)) >= c::pi * 4e-3 * c::epsilon_0 * e2.vrms * e2.vrms / z);
    const double h = 1e-4 * z;
    const double fd = -(residual_force(z + h, e2) - residual_force(z - h, e2)) / (2 * h);
    CHECK(residual_force(z, e2, 1) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(residual_force(3e-6, e2), BoundsError);
}

TEST_CASE("vm profile") {
  const auto p = VmProfile::table({1e-7, 1e-6, 2e-6}, {0.1, 0.2, 0.25});
  CHECK(p.value(1e-6) == doctest::Approx(0.2));
  CHECK(p.shifted(0.05).value(1e-6) == doctest::Approx(0.25));
  CHECK(p.shifted(0.05).derivative(5e-7) == doctest::Approx(p.derivative(5e-7)));
  CHECK(VmProfile::constant(0.3).derivative(1e-6) == 0.0);
  CHECK(VmProfile::constant(0.3).contains(1.0));
}

TEST_CASE("patch map statistics") {
  const auto m = generate_patch_map(256, 256, 2e-6, 20e-6, 0.1, 0.05, 42);
  CHECK(m.sample_rms() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.sample_mean() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(estimate_correlation_length(m) == doctest::Approx(20e-6).epsilon(0.25));
  const auto again = generate_patch_map(256, 256, 2e-6, 20e-6, 0.1, 0.05, 42);
  CHECK(again.values == m.values);
  const auto other = generate_patch_map(256, 256, 2e-6, 20e-6, 0.1, 0.05, 43);
  CHECK(other.values != m.values);
  const auto flat = generate_patch_map(16, 16, 2e-6, 20e-6, 0.0, 0.3, 1);
  for (double v : flat.values) CHECK(v == 0.3);
  CHECK_THROWS_AS(generate_patch_map(1, 16, 2e-6, 20e-6, 0.1, 0.0, 1), ConfigError);
}

TEST_CASE("sphere-averaged contact potential") {
  const auto flat = generate_patch_map(128, 128, 2e-6, 10e-6, 0.0, 0.42, 1);
  for (double z : {1e-7, 2e-6, 1e-4})
    CHECK(vm_from_patches(flat, 128e-6, 128e-6, z, 4e-3, 50e-6) == doctest::Approx(0.42).epsilon(1e-14));

  const auto a = generate_patch_map(128, 128, 2e-6, 8e-6, 0.1, 0.0, 5);
  const auto b = generate_patch_map(128, 128, 2e-6, 8e-6, 0.1, 0.0, 6);
  auto mix = a;
  for (std::size_t i = 0; i < mix.values.size(); ++i) mix.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
  const double x = 127e-6, y = 120e-6;
  const double va = vm_from_patches(a, x, y, 3e-7, 4e-3, 50e-6);
  const double vb = vm_from_patches(b, x, y, 3e-7, 4e-3, 50e-6);
  CHECK(vm_from_patches(mix, x, y, 3e-7, 4e-3, 50e-6) == doctest::Approx(2.0 * va - 0.5 * vb).epsilon(1e-12));

  CHECK(std::abs(vm_from_patches(a, x, y, 2e-6, 4e-3, 50e-6) - vm_from_patches(a, x, y, 0.15e-6, 4e-3, 50e-6)) >
        0.0);

  // a very distant sphere weights the footprint uniformly
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < a.ny; ++j)
    for (std::size_t i = 0; i < a.nx; ++i) {
      const double dx = i * a.spacing - x, dy = j * a.spacing - y;
      if (dx * dx + dy * dy <= 50e-6 * 50e-6) {
        sum += a.at(i, j);
        ++n;
      }
    }
  CHECK(vm_from_patches(a, x, y, 1.0, 4e-3, 50e-6) == doctest::Approx(sum / n).epsilon(1e-6));
  CHECK_THROWS_AS(vm_from_patches(a, 10e-6, 10e-6, 1e-7, 4e-3, 50e-6), BoundsError);
}
