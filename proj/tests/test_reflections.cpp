#include <doctest.h>

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cuspext/random.hpp"
#include "cuspext/reflections.hpp"
#include "cuspext/sobolev.hpp"

using namespace cuspext;

namespace {

Point pt(double t, double x1, double x2 = 0.0) {
  Eigen::VectorXd x(2);
  x << x1, x2;
  return Point(t, x);
}

Point pt4(double t, double x1, double x2, double x3) {
  Eigen::VectorXd x(3);
  x << x1, x2, x3;
  return Point(t, x);
}

double dist(const Point& a, const Point& b) { return std::hypot(a.t - b.t, (a.x - b.x).norm()); }

double spectral(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()[0];
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("chart names round-trip") {
  for (ChartId c : {ChartId::R1Outer, ChartId::R1Inner, ChartId::R2Outer}) {
    CHECK(chart_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(chart_from_string("r3"), ParameterError);
}

TEST_CASE("apply examples by direct substitution") {
  const CuspParams params(3, 2.0);
  // A: (-t, |t|^{s-1} x / 6)
  Point w = apply(ChartId::R1Outer, params, pt(-0.25, 0.1));
  CHECK(w.t == doctest::Approx(0.25));
  CHECK(w.x[0] == doctest::Approx(0.25 * 0.1 / 6.0));
  CHECK(w.x[1] == 0.0);
  // B: (|x|, (t/6)|x|^{s-2} x + (1/3)|x|^{s-1} x)
  w = apply(ChartId::R1Outer, params, pt(0.1, 0.2));
  CHECK(w.t == doctest::Approx(0.2));
  CHECK(w.x[0] == doctest::Approx(0.1 / 6.0 * 0.2 + 0.2 * 0.2 / 3.0));
  // C: lambda x + mu x/|x| with lambda = t^{s-1}/(2(t^{s-1}-1)).
  const double lambda = 0.4 / (2.0 * (0.4 - 1.0));
  const double mu = 0.16 - 0.4 * 0.4 * 0.4 / (2.0 * (0.4 - 1.0));
  w = apply(ChartId::R1Outer, params, pt(0.4, 0.3));
  CHECK(lambda == doctest::Approx(-1.0 / 3.0));
  CHECK(w.t == doctest::Approx(0.4));
  CHECK(w.x[0] == doctest::Approx(lambda * 0.3 + mu));
  CHECK(w.x[0] == doctest::Approx(0.1133333).epsilon(1e-6));
  // D: (-t, x/2)
  w = apply(ChartId::R2Outer, params, pt(-0.25, 0.01));
  CHECK(w.t == doctest::Approx(0.25));
  CHECK(w.x[0] == doctest::Approx(0.005));
  // Inner piece 2: (12|x|/t^{s-1} - 3t, t x/|x|)
  w = apply(ChartId::R1Inner, params, pt(0.5, 0.05));
  CHECK(w.t == doctest::Approx(-0.3));
  CHECK(w.x[0] == doctest::Approx(0.5));
}

TEST_CASE("boundary points are fixed by every chart") {
  const CuspParams params(3, 2.0);
  const Point b = pt(0.25, 0.0625);
  for (ChartId c : {ChartId::R1Outer, ChartId::R1Inner, ChartId::R2Outer}) {
    CHECK(dist(apply(c, params, b), b) == 0.0);
    CHECK(dist(invert(c, params, b), b) == 0.0);
  }
}

TEST_CASE("charts reject points outside their domain") {
  const CuspParams params(3, 2.0);
  CHECK_THROWS_AS(apply(ChartId::R1Outer, params, pt(0.25, 0.015)), DomainError);
  CHECK_THROWS_AS(apply(ChartId::R2Outer, params, pt(-0.25, 0.4)), DomainError);
  CHECK_THROWS_AS(apply(ChartId::R1Inner, params, pt(-0.25, 0.1)), DomainError);
  try {
    apply(ChartId::R1Outer, params, pt(0.25, 0.015));
  } catch (const DomainError& e) {
    CHECK(e.label() == RegionLabel::InnerPiece2);
    CHECK(std::string(e.what()).find("InnerPiece2") != std::string::npos);
  }
}

TEST_CASE("exact distortion values") {
  const CuspParams params(3, 2.0);
  const Jet axis = differential(ChartId::R1Inner, params, pt(0.5, 0.0));
  CHECK(axis.opnorm == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(std::abs(axis.det) == doctest::Approx(144.0).epsilon(1e-12));
  // Off the axis the t-derivative column adds to the spectral norm; |det| is unchanged.
  const Jet off = differential(ChartId::R1Inner, params, pt(0.5, 0.01));
  CHECK(std::abs(off.det) == doctest::Approx(144.0).epsilon(1e-12));
  CHECK(off.opnorm == doctest::Approx(spectral(off.differential)).epsilon(1e-12));
  CHECK(off.opnorm >= 12.0);
  CHECK(distortion(ChartId::R1Inner, params, pt(0.5, 0.0), 2.0) == doctest::Approx(1.0));

  for (int n : {3, 4, 5}) {
    const CuspParams pn(n, 2.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n - 1);
    x[0] = 0.01;
    const Jet d = differential(ChartId::R2Outer, pn, Point(-0.25, x));
    CHECK(d.opnorm == 1.0);
    CHECK(std::abs(d.det) == std::ldexp(1.0, -(n - 1)));
  }
  const Jet d3 = differential(ChartId::R2Outer, params, pt(-0.25, 0.01));
  CHECK(d3.det == -0.25);
  CHECK(distortion(ChartId::R2Outer, params, pt(-0.25, 0.01), 2.0) == 4.0);

  const Jet a = differential(ChartId::R1Outer, params, pt(-0.25, 0.1));
  CHECK(std::abs(a.det) == doctest::Approx(1.0 / 576.0).epsilon(1e-12));
  CHECK(distortion(ChartId::R1Outer, params, pt(-0.25, 0.1), 1.0) ==
        doctest::Approx(a.opnorm * 576.0).epsilon(1e-12));
  CHECK(a.opnorm >= 1.0);
}

TEST_CASE("analytic differential matches the printed matrices") {
  // Printed entries transcribed literally, evaluated at generic points with n = 4.
  const double s = 2.5;
  const CuspParams params(4, s);
  const auto x_of = [](const Point& z) { return z.x; };

  SUBCASE("region A") {
    const Point z = pt4(-0.3, 0.05, -0.1, 0.07);
    const double at = 0.3;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 0) = -1.0;
    for (int i = 0; i < 3; ++i) {
      m(i + 1, 0) = (1.0 - s) / 6.0 * std::pow(at, s - 2.0) * z.x[i];
      m(i + 1, i + 1) = std::pow(at, s - 1.0) / 6.0;
    }
    CHECK(rel(differential(ChartId::R1Outer, params, z).differential, m) < 1e-12);
  }
  SUBCASE("region B") {
    const Point z = pt4(0.05, 0.2, -0.1, 0.15);
    const Eigen::VectorXd x = x_of(z);
    const double r = x.norm();
    const double t = z.t;
    Eigen::MatrixXd m(4, 4);
    m(0, 0) = 0.0;
    for (int j = 0; j < 3; ++j) m(0, j + 1) = x[j] / r;
    for (int i = 0; i < 3; ++i) {
      m(i + 1, 0) = x[i] / 6.0 * std::pow(r, s - 2.0);
      for (int j = 0; j < 3; ++j) {
        const double cross = t / 6.0 * (s - 2.0) * x[i] * x[j] / std::pow(r, 4.0 - s) +
                             (s - 1.0) / 3.0 * x[i] * x[j] / std::pow(r, 3.0 - s);
        m(i + 1, j + 1) = cross + (i == j ? t / 6.0 * std::pow(r, s - 2.0) + std::pow(r, s - 1.0) / 3.0 : 0.0);
      }
    }
    CHECK(rel(differential(ChartId::R1Outer, params, z).differential, m) < 1e-12);
  }
  SUBCASE("region C spatial block") {
    const Point z = pt4(0.4, 0.1, 0.05, -0.08);
    const Eigen::VectorXd x = x_of(z);
    const double r = x.norm();
    const double t = z.t;
    const double u = std::pow(t, s - 1.0);
    const double lam = u / (2.0 * (u - 1.0));
    const double mu = std::pow(t, s) - std::pow(t, 2.0 * s - 1.0) / (2.0 * (u - 1.0));
    const Eigen::MatrixXd d = differential(ChartId::R1Outer, params, z).differential;
    CHECK(d(0, 0) == doctest::Approx(1.0));
    for (int i = 0; i < 3; ++i) {
      CHECK(d(i + 1, i + 1) == doctest::Approx(lam + mu * (1.0 / r - x[i] * x[i] / std::pow(r, 3))));
    }
  }
  SUBCASE("region D") {
    const Point z = pt4(-0.3, 0.01, 0.0, 0.02);
    Eigen::MatrixXd m = 0.5 * Eigen::MatrixXd::Identity(4, 4);
    m(0, 0) = -1.0;
    CHECK(rel(differential(ChartId::R2Outer, params, z).differential, m) < 1e-15);
  }
  SUBCASE("region E first row, first column and diagonal") {
    const Point z = pt4(0.1, 0.05, 0.04, -0.03);
    const Eigen::VectorXd x = x_of(z);
    const double r = x.norm();
    const double t = z.t;
    const Eigen::MatrixXd d = differential(ChartId::R2Outer, params, z).differential;
    CHECK(d(0, 0) == doctest::Approx(0.0));
    for (int i = 0; i < 3; ++i) {
      CHECK(d(0, i + 1) == doctest::Approx(x[i] / (s * std::pow(r, 2.0 - 1.0 / s))));
      CHECK(d(i + 1, 0) == doctest::Approx(x[i] / (4.0 * std::pow(r, 1.0 / s))));
      CHECK(d(i + 1, i + 1) ==
            doctest::Approx(t / 4.0 * (1.0 / std::pow(r, 1.0 / s) - x[i] * x[i] / (s * std::pow(r, 2.0 + 1.0 / s))) +
                            0.75));
    }
  }
  SUBCASE("inner piece 1") {
    const double t = 0.4;
    const Point z = pt4(t, 0.002, -0.001, 0.003);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 0) = -1.0;
    for (int i = 0; i < 3; ++i) {
      m(i + 1, 0) = (1.0 - s) * 6.0 * z.x[i] / std::pow(t, s);
      m(i + 1, i + 1) = 6.0 / std::pow(t, s - 1.0);
    }
    CHECK(rel(differential(ChartId::R1Inner, params, z).differential, m) < 1e-12);
  }
  SUBCASE("inner piece 2") {
    const double t = 0.4;
    const double ts = std::pow(t, s);
    const Point z = pt4(t, 0.2 * ts, 0.1 * ts, -0.05 * ts);
    const Eigen::VectorXd x = x_of(z);
    const double r = x.norm();
    Eigen::MatrixXd m(4, 4);
    m(0, 0) = 12.0 * (1.0 - s) * r / ts - 3.0;
    for (int j = 0; j < 3; ++j) m(0, j + 1) = 12.0 * x[j] / (r * std::pow(t, s - 1.0));
    for (int i = 0; i < 3; ++i) {
      m(i + 1, 0) = x[i] / r;
      for (int j = 0; j < 3; ++j) {
        m(i + 1, j + 1) = (i == j ? t / r : 0.0) - t * x[i] * x[j] / std::pow(r, 3);
      }
    }
    CHECK(rel(differential(ChartId::R1Inner, params, z).differential, m) < 1e-12);
  }
  SUBCASE("inner piece 3") {
    const double t = 0.4;
    const double ts = std::pow(t, s);
    const Point z = pt4(t, 0.5 * ts, 0.3 * ts, -0.2 * ts);
    const Eigen::VectorXd x = x_of(z);
    const double r = x.norm();
    const double beta = 1.5 * t - 0.5 * ts;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 0) = 1.0;
    for (int i = 0; i < 3; ++i) {
      m(i + 1, 0) = (s - 1.0) * 3.0 * x[i] / (2.0 * ts) + (1.5 - s / 2.0 * std::pow(t, s - 1.0)) * x[i] / r;
      for (int j = 0; j < 3; ++j) {
        m(i + 1, j + 1) = i == j ? (1.5 - 1.5 / std::pow(t, s - 1.0)) + beta * (1.0 / r - x[i] * x[i] / std::pow(r, 3))
                                 : -beta * x[i] * x[j] / std::pow(r, 3);
      }
    }
    CHECK(rel(differential(ChartId::R1Inner, params, z).differential, m) < 1e-12);
  }
}

TEST_CASE("finite differences agree with the analytic differential") {
  const CuspParams params(3, 2.0);
  const Point a = pt(-0.25, 0.1);
  CHECK(rel(differential(ChartId::R1Outer, params, a).differential,
            differential_fd(ChartId::R1Outer, params, a, 1e-6)) <= 1e-5);
  const Point d = pt(-0.25, 0.01);
  Eigen::MatrixXd diag = 0.5 * Eigen::MatrixXd::Identity(3, 3);
  diag(0, 0) = -1.0;
  CHECK(rel(differential_fd(ChartId::R2Outer, params, d, fd_step(d)), diag) < 1e-9);
  const Point inner = pt(0.5, 0.0);
  CHECK(spectral(differential_fd(ChartId::R1Inner, params, inner, fd_step(inner))) ==
        doctest::Approx(12.0).epsilon(1e-5));

  for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                             RegionLabel::RegionD, RegionLabel::RegionE, RegionLabel::InnerPiece1,
                             RegionLabel::InnerPiece2, RegionLabel::InnerPiece3}) {
    const ChartId chart = chart_for_region(region);
    int tested = 0;
    for (const auto& node : quadrature_nodes(params, region, Shell(2), 64, 9)) {
      const Point z = node.point();
      try {
        const Eigen::MatrixXd fd = differential_fd(chart, params, z, fd_step(z));
        CHECK(rel(differential(chart, params, z).differential, fd) <= 1e-5);
        ++tested;
      } catch (const PreconditionError&) {
      }
    }
    CHECK(tested > 32);
  }
}

TEST_CASE("differential preconditions") {
  const CuspParams params(3, 2.0);
  CHECK_THROWS_AS(differential(ChartId::R1Outer, params, pt(0.25, 0.0625)), PreconditionError);
  CHECK_THROWS_AS(differential(ChartId::R1Outer, params, pt(-0.25, 0.25 * (1.0 - 1e-9))),
                  PreconditionError);
  CHECK_THROWS_AS(differential_fd(ChartId::R1Outer, params, pt(-0.25, 0.1), 0.0), ParameterError);
  CHECK_THROWS_AS(distortion(ChartId::R1Outer, params, pt(-0.25, 0.1), 0.5), WindowError);
}

TEST_CASE("det and opnorm agree with recomputation") {
  for (int n : {3, 4}) {
    const CuspParams params(n, 3.0);
    for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                               RegionLabel::RegionD, RegionLabel::RegionE, RegionLabel::InnerPiece1,
                               RegionLabel::InnerPiece2, RegionLabel::InnerPiece3}) {
      for (const auto& node : quadrature_nodes(params, region, Shell(3), 32, 4)) {
        Jet jet;
        try {
          jet = differential(chart_for_region(region), params, node.point());
        } catch (const PreconditionError&) {
          continue;
        }
        CHECK(jet.det == doctest::Approx(jet.differential.determinant()).epsilon(1e-10));
        CHECK(jet.opnorm == doctest::Approx(spectral(jet.differential)).epsilon(1e-10));
        CHECK(jet.opnorm >= std::pow(std::abs(jet.det), 1.0 / n) * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("invert examples and round trips") {
  const CuspParams params(3, 2.0);
  Point z = invert(ChartId::R1Outer, params, pt(0.25, 0.25 * 0.1 / 6.0));
  CHECK(z.t == doctest::Approx(-0.25));
  CHECK(z.x[0] == doctest::Approx(0.1));
  z = invert(ChartId::R2Outer, params, pt(0.25, 0.005));
  CHECK(z.t == doctest::Approx(-0.25));
  CHECK(z.x[0] == doctest::Approx(0.01));

  for (double s : {1.5, 2.0, 3.0}) {
    const CuspParams ps(4, s);
    for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                               RegionLabel::RegionD, RegionLabel::RegionE, RegionLabel::InnerPiece1,
                               RegionLabel::InnerPiece2, RegionLabel::InnerPiece3}) {
      const ChartId chart = chart_for_region(region);
      for (int k : {1, 6, 15}) {
        for (const auto& node : quadrature_nodes(ps, region, Shell(k), 16, 2)) {
          const Point p0 = node.point();
          CHECK(dist(invert(chart, ps, apply(chart, ps, p0)), p0) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("apply commutes with rotations of the cross-section") {
  const CuspParams params(4, 2.0);
  Rng rng(3);
  Eigen::MatrixXd g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
  const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  for (RegionLabel region : {RegionLabel::RegionB, RegionLabel::RegionE, RegionLabel::InnerPiece3}) {
    const ChartId chart = chart_for_region(region);
    for (const auto& node : quadrature_nodes(params, region, Shell(2), 16, 1)) {
      const Point z = node.point();
      const Point w = apply(chart, params, z);
      const Point wr = apply(chart, params, Point(z.t, rot * z.x));
      CHECK(dist(wr, Point(w.t, rot * w.x)) < 1e-12);
    }
  }
}

TEST_CASE("interface continuity at matched pairs") {
  for (double s : {1.5, 2.0, 3.0}) {
    const CuspParams params(3, s);
    for (double t : {0.01, 0.1, 0.4}) {
      const auto gap = [&](ChartId c, double tt, double r) {
        return dist(apply(c, params, pt(tt, r * (1 - 1e-10))), apply(c, params, pt(tt, r * (1 + 1e-10))));
      };
      CHECK(gap(ChartId::R1Outer, -t, t) < 1e-9);
      CHECK(gap(ChartId::R1Outer, t, t) < 1e-9);
      CHECK(gap(ChartId::R2Outer, -t, std::pow(t, s)) < 1e-9);
      CHECK(gap(ChartId::R1Inner, t, std::pow(t, s) / 6.0) < 1e-9);
      CHECK(gap(ChartId::R1Inner, t, std::pow(t, s) / 3.0) < 1e-9);
    }
  }
}

TEST_CASE("jacobian of A is exact") {
  const CuspParams params(4, 3.0);
  for (double t : {0.3, 0.01, 1e-4}) {
    const Jet jet = differential(ChartId::R1Outer, params, pt4(-t, 0.2 * t, 0.1 * t, 0.0));
    CHECK(std::abs(jet.det) == doctest::Approx(std::pow(std::pow(t, 2.0) / 6.0, 3)).epsilon(1e-12));
  }
}
