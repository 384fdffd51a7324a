#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cuspext/sobolev.hpp"
#include "cuspext/test_function.hpp"

using namespace cuspext;

namespace {

ShellSum from_ratios(double ratio, int count) {
  std::vector<double> logs;
  for (int i = 0; i < count; ++i) logs.push_back(i * std::log(ratio));
  return ShellSum::from_logs({5, 5 + count - 1}, logs);
}

}  // namespace

TEST_CASE("critical exponents") {
  CHECK(q_max_r1(2.0, 3, 2.0) == doctest::Approx(1.2));
  CHECK(p_min_r1(3, 2.0) == doctest::Approx(5.0 / 3.0));
  CHECK(q_max_r1(10.0 / 3.0, 3, 2.0) == doctest::Approx(2.0));
  CHECK(q_max_r2(2.0, 3, 2.0) == doctest::Approx(10.0 / 7.0));
  CHECK(p_min_r2(3, 2.0) == doctest::Approx(1.25));
  CHECK(q_max_r2(10.0 / 3.0, 3, 2.0) == doctest::Approx(2.0));
  CHECK(p_star(3, 2.0) == doctest::Approx(10.0 / 3.0));
  CHECK(p_star(4, 3.0) == doctest::Approx(7.5));
  CHECK_THROWS_AS(q_max_r1(1.0, 3, 2.0), WindowError);
  CHECK_THROWS_AS(q_max_r2(1.2, 3, 2.0), WindowError);
}

TEST_CASE("critical curves cross at p_star") {
  for (int n : {3, 4, 5}) {
    for (double s : {1.5, 2.0, 3.0}) {
      const double ps = p_star(n, s);
      CHECK(std::abs(q_max_r1(ps, n, s) - (n - 1)) <= 1e-12 * (n - 1));
      CHECK(std::abs(q_max_r2(ps, n, s) - (n - 1)) <= 1e-12 * (n - 1));
    }
  }
}

TEST_CASE("critical curve shapes") {
  const int n = 3;
  const double s = 2.0;
  const double h = 0.1;
  for (double p = 2.0; p < 50.0; p += 0.5) {
    const double a = q_max_r1(p, n, s);
    const double b = q_max_r1(p + h, n, s);
    const double c = q_max_r1(p + 2 * h, n, s);
    CHECK(b > a);
    CHECK((c - b) == doctest::Approx(b - a));
    const double a2 = q_max_r2(p, n, s);
    const double b2 = q_max_r2(p + h, n, s);
    const double c2 = q_max_r2(p + 2 * h, n, s);
    CHECK(b2 > a2);
    CHECK(c2 - b2 < b2 - a2);
  }
  CHECK(q_max_r2(1e12, n, s) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("dual exponent") {
  CHECK(dual_exponent(4.0, 3) == doctest::Approx(2.0));
  CHECK(dual_exponent(3.0, 3) == doctest::Approx(3.0));
  CHECK(dual_exponent(5.0, 5) == doctest::Approx(5.0));
  CHECK(dual_exponent(2.0 + 1e-9, 3) > 1e8);
  CHECK_THROWS_AS(dual_exponent(2.0, 3), WindowError);
  // Hoelder conjugation for n = 2 is an involution.
  for (double p : {1.1, 2.0, 7.5}) CHECK(dual_exponent(dual_exponent(p, 2), 2) == doctest::Approx(p));
  // For n >= 3 only the fixed point p = n returns to itself.
  CHECK(dual_exponent(dual_exponent(3.5, 3), 3) == doctest::Approx(7.0));
}

TEST_CASE("predicted shell exponents") {
  CHECK(predicted_shell_exponent(RegionLabel::RegionA, 2.0, 1.0, 3, 2.0) == doctest::Approx(0.0));
  CHECK(predicted_shell_exponent(RegionLabel::RegionA, 2.0, 1.5, 3, 2.0) == doctest::Approx(-4.0));
  CHECK(predicted_shell_exponent(RegionLabel::RegionE, 2.0, 1.4, 3, 2.0) ==
        doctest::Approx(4.0 - 2.8 / 0.6));
  CHECK(predicted_shell_exponent(RegionLabel::RegionD, 3.0, 1.4, 3, 2.0) == doctest::Approx(4.0));
  CHECK(predicted_shell_ratio(0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(predicted_shell_exponent(RegionLabel::RegionA, 2.0, 2.0, 3, 2.0), WindowError);
  CHECK_THROWS_AS(predicted_shell_exponent(RegionLabel::RegionA, 2.0, 0.5, 3, 2.0), WindowError);
}

TEST_CASE("exponent sign agrees with the critical curve") {
  // A/B/C: e > -1 iff q < q_max_r1.  E: e > -1 iff q < q_max_r2.
  for (double p = 2.0; p <= 6.0; p += 0.25) {
    for (double q = 1.0; q < p; q += 0.05) {
      if (std::abs(q - q_max_r1(p, 3, 2.0)) > 1e-9) {
        CHECK((predicted_shell_exponent(RegionLabel::RegionB, p, q, 3, 2.0) > -1.0) ==
              (q < q_max_r1(p, 3, 2.0)));
      }
      if (std::abs(q - q_max_r2(p, 3, 2.0)) > 1e-9) {
        CHECK((predicted_shell_exponent(RegionLabel::RegionE, p, q, 3, 2.0) > -1.0) ==
              (q < q_max_r2(p, 3, 2.0)));
      }
    }
  }
}

TEST_CASE("shell sums") {
  const ShellSum sum = ShellSum::from_logs(
      {5, 8}, {std::log(1.0), std::log(2.0), -std::numeric_limits<double>::infinity(), std::log(4.0)});
  CHECK(sum.contributions[2] == 0.0);
  CHECK(sum.total() == doctest::Approx(7.0));
  CHECK(std::isnan(sum.ratios[0]));
  CHECK(sum.ratios[1] == doctest::Approx(2.0));
  CHECK(sum.ratios[2] == 0.0);
  for (std::size_t i = 1; i < sum.partial_sums.size(); ++i) {
    CHECK(sum.partial_sums[i] >= sum.partial_sums[i - 1]);
  }
  const ShellSum zeros = ShellSum::from_logs(
      {5, 6}, {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  CHECK(zeros.ratios[1] == 0.0);
}

TEST_CASE("verdict rule") {
  CHECK(convergence_verdict(from_ratios(0.5, 10)).kind == VerdictKind::Convergent);
  CHECK(convergence_verdict(from_ratios(8.0, 10)).kind == VerdictKind::Divergent);
  CHECK(convergence_verdict(from_ratios(0.95, 10)).kind == VerdictKind::Inconclusive);
  CHECK(convergence_verdict(from_ratios(0.5, 10)).ratio == doctest::Approx(0.5));
  CHECK_THROWS_AS(convergence_verdict(from_ratios(0.5, 5)), ParameterError);
  // A huge partial sum is divergent even with decaying ratios.
  std::vector<double> logs(8, std::log(1e12));
  logs.back() = std::log(1e11);
  CHECK(convergence_verdict(ShellSum::from_logs({5, 12}, logs)).kind == VerdictKind::Divergent);
}

TEST_CASE("distortion integral on A follows the analytic ratios") {
  const CuspParams params(3, 2.0);
  const ShellSum e0 = distortion_integral(params, ChartId::R1Outer, RegionLabel::RegionA, 2.0, 1.0,
                                          {5, 20}, 512, 1);
  for (std::size_t i = 5; i < e0.ratios.size(); ++i) CHECK(e0.ratios[i] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(convergence_verdict(e0).kind == VerdictKind::Convergent);
  const ShellSum e4 = distortion_integral(params, ChartId::R1Outer, RegionLabel::RegionA, 2.0, 1.5,
                                          {5, 20}, 512, 1);
  for (std::size_t i = 1; i < e4.partial_sums.size(); ++i) {
    CHECK(e4.partial_sums[i] >= 8.0 * e4.partial_sums[i - 1] * 0.98);
  }
  CHECK(convergence_verdict(e4).kind == VerdictKind::Divergent);
}

TEST_CASE("distortion integral on D is the constant integrand times the volume") {
  const CuspParams params(3, 2.0);
  const double p = 3.0;
  const double q = 1.7;
  const ShellSum sum = distortion_integral(params, ChartId::R2Outer, RegionLabel::RegionD, p, q,
                                           {5, 12}, 64, 1);
  const double integrand = std::pow(4.0, q / (p - q));
  for (int k = 5; k <= 12; ++k) {
    CHECK(sum.contributions[k - 5] ==
          doctest::Approx(integrand * shell_measure(params, RegionLabel::RegionD, Shell(k))).epsilon(1e-12));
  }
}

TEST_CASE("distortion integrals are deterministic") {
  const CuspParams params(3, 2.0);
  const auto a = distortion_integral(params, ChartId::R2Outer, RegionLabel::RegionE, 2.0, 1.3, {5, 15}, 128, 9);
  const auto b = distortion_integral(params, ChartId::R2Outer, RegionLabel::RegionE, 2.0, 1.3, {5, 15}, 128, 9);
  CHECK(a.log_contributions == b.log_contributions);
  CHECK_THROWS_AS(distortion_integral(params, ChartId::R2Outer, RegionLabel::RegionE, 2.0, 2.0, {5, 15}, 8, 9),
                  WindowError);
}

TEST_CASE("field extrema bound the opnorm band on E") {
  const CuspParams params(3, 2.0);
  const DistortionField field(params, ChartId::R2Outer, RegionLabel::RegionE, {5, 20}, 256, 3);
  double hi = 0.0;
  double lo = 1e300;
  for (const auto& [mx, mn] : field.shell_extrema(1.0, 0.5)) {
    hi = std::max(hi, mx);
    lo = std::min(lo, mn);
  }
  CHECK(hi / lo <= 4.0);
}

TEST_CASE("sobolev seminorm") {
  const CuspParams params(3, 2.0);
  // |grad|^2 = 0.25 t^{-3} over cross-sections pi t^4: pi/4 * int_0^{1/2} t dt = pi/32.
  const ShellSum sum =
      sobolev_seminorm(params, PowerAlpha{0.5}, RegionLabel::CuspInterior, 2.0, {1, 30}, 2048, 1);
  CHECK(sum.total() == doctest::Approx(std::numbers::pi / 32.0).epsilon(0.01));
  CHECK(sobolev_seminorm(params, Constant{3.0}, RegionLabel::RegionB, 2.0, {1, 10}, 64, 1).total() == 0.0);
  CHECK(sobolev_seminorm(params, ClampT{}, RegionLabel::RegionA, 1.0, {1, 10}, 64, 1).total() == 0.0);
}

TEST_CASE("scaling fit") {
  std::vector<std::pair<double, double>> exact;
  for (int k = 1; k <= 10; ++k) {
    const double t = std::ldexp(1.0, -k);
    exact.emplace_back(t, t * t);
  }
  const ScalingFit fit = scaling_fit(exact);
  CHECK(std::abs(fit.slope - 2.0) <= 1e-12);
  CHECK(fit.residual <= 1e-12);
  std::vector<std::pair<double, double>> noisy = exact;
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i].second *= (i % 2 ? 1.5 : 0.7);
  CHECK(scaling_fit(noisy).residual > 0.1);
  CHECK_THROWS_AS(scaling_fit({{0.5, 1.0}, {0.25, 2.0}}), ParameterError);
}

TEST_CASE("parallel_for visits every index and propagates errors") {
  std::vector<int> seen(100, 0);
  parallel_for(seen.size(), [&](std::size_t i) { seen[i] += 1; });
  for (int v : seen) CHECK(v == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw WindowError("boom");
                  }),
                  WindowError);
}
