#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "cuspext/experiments.hpp"

using namespace cuspext;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string first_line(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

}  // namespace

TEST_CASE("fmt uses twelve significant digits") {
  CHECK(fmt(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt(2.0) == "2");
  CHECK(fmt(1e-20) == "1e-20");
}

TEST_CASE("CSV headers") {
  CHECK(std::string(kSweepHeader) ==
        "n,s,scheme,region,p,q,q_max_theory,admissible_theory,e_predicted,k_min,k_max,partial_sum,"
        "last_ratio,verdict,agrees,seed");
  CHECK(std::string(kScalingHeader) == "region,scale,opnorm,abs_det,fitted_slope,target_slope");
  CHECK(std::string(kExtendNormHeader) == "shell,k,Lq_value_term,Lq_grad_term,partial,verdict");
  CHECK(std::string(kHolderHeader) == "t,osc,diam,fitted_exponent");
}

TEST_CASE("sweep on the first reflection agrees away from the critical curve") {
  SweepConfig config;
  config.schemes = {Scheme::R1};
  config.p_values = {2.0};
  config.q_values = {1.0, 1.1, 1.3, 1.5};
  config.samples = 1024;
  const auto rows = run_sweep(config);
  REQUIRE(rows.size() == 16);
  for (const auto& row : rows) {
    CHECK(row.q_max_theory == doctest::Approx(1.2));
    CHECK(row.admissible_theory == (row.q < 1.2));
    if (row.region == "all") {
      CHECK(row.agrees == "true");
      CHECK(row.verdict == (row.q < 1.2 ? "Convergent" : "Divergent"));
    }
  }
}

TEST_CASE("sweep on the second reflection") {
  SweepConfig config;
  config.schemes = {Scheme::R2};
  config.p_values = {2.0};
  config.q_values = {1.3};
  config.samples = 1024;
  const auto rows = run_sweep(config);
  REQUIRE(rows.size() == 3);
  const auto& all = rows.back();
  CHECK(all.region == "all");
  CHECK(all.admissible_theory);
  CHECK(all.verdict == "Convergent");
  CHECK(all.agrees == "true");
}

TEST_CASE("window cells are reported, not evaluated") {
  SweepConfig config;
  config.schemes = {Scheme::R1};
  config.p_values = {2.0};
  config.q_values = {2.0, 2.5};
  config.samples = 16;
  for (const auto& row : run_sweep(config)) {
    CHECK(row.verdict == "WindowError");
    CHECK(row.agrees == "na");
    CHECK(std::isnan(row.partial_sum));
  }
  config.q_values = {1.98};
  config.q_gap = 0.05;
  for (const auto& row : run_sweep(config)) CHECK(row.verdict == "WindowError");
}

TEST_CASE("admissibility guard on the critical curve") {
  const double p = 2.0;
  const double q = q_max_r1(p, 3, 2.0);
  CHECK_FALSE(admissible(Scheme::R1, p, q, 3, 2.0));
  CHECK(admissible(Scheme::R1, p, q * (1.0 - 1e-9), 3, 2.0));
  CHECK(critical_margin(Scheme::R1, p, 1.0, 3, 2.0) == doctest::Approx(0.2));
}

TEST_CASE("default grid") {
  const SweepConfig grid = SweepConfig::grid(3, 2.0);
  CHECK(grid.q_values.size() == 21);
  CHECK(grid.q_values.front() == 1.0);
  CHECK(grid.q_values.back() == doctest::Approx(5.95));
  CHECK(grid.q_gap == 0.05);
}

TEST_CASE("sweep CSV is byte-identical across runs") {
  SweepConfig config;
  config.p_values = {2.0, 3.5};
  config.q_values = {1.1, 1.6};
  config.samples = 256;
  config.seed = 5;
  const std::string a = to_csv(run_sweep(config));
  const std::string b = to_csv(run_sweep(config));
  CHECK(a == b);
  CHECK(first_line(a) == kSweepHeader);
  config.seed = 6;
  CHECK(to_csv(run_sweep(config)) != a);
}

TEST_CASE("scaling fits the analytic slopes") {
  for (int n : {3, 4}) {
    for (double s : {2.0, 3.0}) {
      ScalingConfig config;
      config.n = n;
      config.s = s;
      for (const auto& row : run_scaling(config)) {
        CHECK(row.fitted_slope == doctest::Approx(row.target_slope).epsilon(0.02).scale(1.0));
      }
    }
  }
  ScalingConfig inner;
  inner.regions = {RegionLabel::InnerPiece1};
  for (const auto& row : run_scaling(inner)) CHECK(row.fitted_slope == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK_THROWS_AS(scaling_point(CuspParams(3, 2.0), RegionLabel::CuspInterior, 0.1), ParameterError);
}

TEST_CASE("scaling points sit in their region") {
  for (double s : {1.5, 2.0, 3.0}) {
    const CuspParams params(3, s);
    for (int k = 3; k <= 20; ++k) {
      const double scale = 0.75 * std::ldexp(1.0, -k);
      CHECK(classify(params, Scheme::R1, scaling_point(params, RegionLabel::RegionA, scale)) ==
            RegionLabel::RegionA);
      CHECK(classify(params, Scheme::R1, scaling_point(params, RegionLabel::RegionB, scale)) ==
            RegionLabel::RegionB);
      CHECK(classify(params, Scheme::R1, scaling_point(params, RegionLabel::RegionC, scale)) ==
            RegionLabel::RegionC);
      CHECK(classify(params, Scheme::R2, scaling_point(params, RegionLabel::RegionD, scale)) ==
            RegionLabel::RegionD);
      CHECK(classify(params, Scheme::R2, scaling_point(params, RegionLabel::RegionE, scale)) ==
            RegionLabel::RegionE);
      CHECK(classify(params, Scheme::R1, scaling_point(params, RegionLabel::InnerPiece3, scale)) ==
            RegionLabel::InnerPiece3);
    }
  }
}

TEST_CASE("extendnorm rows") {
  ExtendNormConfig config;
  config.samples = 512;
  const auto result = run_extendnorm(config);
  REQUIRE(result.rows.size() == 26);
  CHECK(split(result.rows.front()).size() == 6);
  CHECK(split(result.rows.front())[1] == "5");
  CHECK(split(result.rows.back())[5] == "Convergent");
  CHECK(to_csv(kExtendNormHeader, result.rows) == to_csv(kExtendNormHeader, run_extendnorm(config).rows));
}

TEST_CASE("holder rows") {
  const auto result = run_holder({3, 2.0, {}});
  REQUIRE(result.rows.size() == 8);
  CHECK(split(result.rows.front())[0] == "0.125");
  CHECK(std::stod(split(result.rows.front())[3]) == doctest::Approx(0.5).epsilon(0.02));
}
