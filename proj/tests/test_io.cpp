#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "casimir/error.hpp"
#include "casimir/io.hpp"

using namespace casimir;
using namespace casimir::io;

TEST_CASE("doubles round trip through their shortest form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.05e-06) == "2.05e-06");
  CHECK(format_double(100000.0) == "1e+05");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(10.0, u(rng)) * (i % 2 ? -1.0 : 1.0);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("sweep records in both formats") {
  std::vector<simulator::SweepRecord> rec{{0, simulator::Direction::Approach, 2.05e-6, -0.48, 99999.91326229255},
                                          {0, simulator::Direction::Retract, 1.5e-7, 0.0200369, 100003.1},
                                          {7, simulator::Direction::Approach, 1e-6, 1.0 / 3.0, 1e5 + 1.0 / 7.0}};
  const auto csv = records_csv(rec);
  CHECK(csv.rfind("run_id,direction,z_m,V,f_Hz\n", 0) == 0);
  CHECK(parse_records(csv) == rec);
  CHECK(parse_records(records_jsonl(rec)) == rec);
  CHECK(parse_records("run_id, direction, z_m, V, f_Hz\r\n1,retract,1e-6,0,1e5\r\n").size() == 1);
}

TEST_CASE("malformed records are input errors") {
  CHECK_THROWS_AS(parse_records(""), ConfigError);
  CHECK_THROWS_AS(parse_records("z_m,value,d1,d3\n1e-7,-1,-2,-3\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("run_id,direction,z_m,V,f_Hz\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("run_id,direction,z_m,V,f_Hz\n0,sideways,1e-6,0,1e5\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("run_id,direction,z_m,V,f_Hz\n0,approach,1e-6,zero,1e5\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("run_id,direction,z_m,V,f_Hz\n0,approach,1e-6,0\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("{\"run_id\":0}\n"), ConfigError);
  CHECK_THROWS_AS(parse_records("{not json\n"), ConfigError);
}

TEST_CASE("frequency series") {
  const std::vector<double> f{1e5, 1e5 + 0.1, 1e5 - 0.2, 1e5};
  const auto s = parse_series(series_csv(f, 0.1));
  CHECK(s.f == f);
  CHECK(sample_interval(s) == 0.1);
  CHECK_THROWS_AS(parse_series("t,f\n0,1\n"), ConfigError);
  CHECK_THROWS_AS(sample_interval(parse_series("t_s,f_Hz\n0,1\n")), InsufficientDataError);
  CHECK_THROWS_AS(sample_interval(parse_series("t_s,f_Hz\n0,1\n1,1\n3,1\n")), ConfigError);
}

TEST_CASE("tables") {
  lifshitz::ForceCurve c;
  c.z = {1e-7, 2e-7};
  c.value = {-1.0, -0.5};
  c.d1 = {-2.0, -1.0};
  c.d3 = {-3.0, -1.5};
  c.model = "perfect_conductor";
  CHECK(curve_csv(c) == "z_m,value,d1,d3\n1e-07,-1,-2,-3\n2e-07,-0.5,-1,-1.5\n");
  const auto j = curve_json(c);
  CHECK(j["temperature_k"] == 0.0);
  CHECK(j["d1"][1] == -1.0);

  const std::vector<analysis::AllanPoint> a{{0.1, 2e-9, 1000}, {1.0, 6e-10, 100}};
  CHECK(allan_csv(a) == "tau_s,sigma_y,n_blocks\n0.1,2e-09,1000\n1,6e-10,100\n");

  simulator::KelvinGrid g;
  g.x = {0.0, 1e-6};
  g.y = {5e-6};
  g.vm = {0.1, 0.2};
  CHECK(kelvin_csv(g) == "x_m,y_m,V_m\n0,5e-06,0.1\n1e-06,5e-06,0.2\n");

  analysis::ModelFitReport r;
  r.model = "drude";
  r.residuals = {{1e-7, 100004.0, 100003.5, 0.5, 0.25}};
  CHECK(residuals_csv(r) == "z_m,f0_meas,f0_model,residual,sigma\n1e-07,100004,100003.5,0.5,0.25\n");
  CHECK(report_json(r)["chi2"] == 0.0);
  analysis::ModelFitReport bad;
  bad.model = "plasma";
  bad.error = "no convergence";
  bad.error_exit_code = 3;
  CHECK(report_json(bad)["exit_code"] == 3);
}
