#include "cuspext/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cuspext/experiments.hpp"
#include "cuspext/extension.hpp"
#include "cuspext/random.hpp"
#include "cuspext/reflections.hpp"
#include "cuspext/sobolev.hpp"

namespace cuspext {

namespace {

constexpr double kHalf = 0.5;

const std::vector<RegionLabel>& all_pieces() {
  static const std::vector<RegionLabel> pieces{
      RegionLabel::RegionA,     RegionLabel::RegionB,     RegionLabel::RegionC,
      RegionLabel::RegionD,     RegionLabel::RegionE,     RegionLabel::InnerPiece1,
      RegionLabel::InnerPiece2, RegionLabel::InnerPiece3};
  return pieces;
}

CheckResult make(std::string name, std::size_t samples, double worst, double threshold,
                 bool pass) {
  return {std::move(name), samples, worst, threshold, pass};
}

CheckResult at_most(std::string name, std::size_t samples, double worst, double threshold) {
  return make(std::move(name), samples, worst, threshold, worst <= threshold);
}

std::string tag(const CuspParams& params) {
  return "[n=" + std::to_string(params.dimension()) + ",s=" + fmt(params.degree()) + "]";
}

std::vector<QuadratureNode> piece_samples(const CuspParams& params, RegionLabel region, int k_lo,
                                          int k_hi, std::size_t per_shell, std::uint64_t seed) {
  std::vector<QuadratureNode> out;
  for (int k = k_lo; k <= k_hi; ++k) {
    const Shell shell(k);
    if (shell_measure(params, region, shell) <= 0.0) continue;
    auto nodes = quadrature_nodes(params, region, shell, per_shell, seed);
    out.insert(out.end(), nodes.begin(), nodes.end());
  }
  return out;
}

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::exp(rng.uniform() * std::log(hi / lo));
}

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v / v.norm();
}

Eigen::MatrixXd random_rotation(Rng& rng, int dim) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

Point profile_point(double t, double r, const Eigen::VectorXd& dir) { return Point(t, r * dir); }

// Deepest shell (at most 6) whose radial scale stays above 1e3 FD steps.
int fd_shell_limit(const CuspParams& params, RegionLabel region) {
  const bool thin = region != RegionLabel::RegionA && region != RegionLabel::RegionB &&
                    region != RegionLabel::RegionC;
  int k = 1;
  while (k < 6) {
    const double t = Shell(k + 1).lower();
    if ((thin ? params.cusp_radius(t) : t) < 1e-3) break;
    ++k;
  }
  return k;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string CheckResult::csv() const {
  return name + ',' + std::to_string(samples) + ',' + fmt(worst_error) + ',' + fmt(threshold) + ',' +
         (pass ? "true" : "false");
}

CheckResult check_partition(const CuspParams& params, Scheme scheme, std::size_t count,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, {101, static_cast<std::int64_t>(scheme)}));
  const double s = params.degree();
  const double r_max = scheme == Scheme::R1 ? kHalf : std::pow(kHalf, s);
  constexpr double m = 1e-9;
  std::size_t tested = 0;
  std::size_t failures = 0;
  while (tested < count) {
    const double t = -kHalf + rng.uniform();
    const double r = r_max * rng.uniform();
    const double at = std::abs(t);
    const double ats = std::pow(at, s);
    RegionLabel expected = RegionLabel::Origin;
    if (t > 0.0 && r < ats * (1.0 - m)) continue;
    if (scheme == Scheme::R1) {
      if (t <= 0.0) {
        if (r < at * (1.0 - m)) expected = RegionLabel::RegionA;
        else if (r > at * (1.0 + m)) expected = RegionLabel::RegionB;
      } else {
        if (r > ats * (1.0 + m) && r < at * (1.0 - m)) expected = RegionLabel::RegionC;
        else if (r > at * (1.0 + m)) expected = RegionLabel::RegionB;
      }
    } else {
      if (t <= 0.0 && r < ats * (1.0 - m)) expected = RegionLabel::RegionD;
      else if (r > ats * (1.0 + m)) expected = RegionLabel::RegionE;
    }
    if (expected == RegionLabel::Origin) continue;
    ++tested;
    const Point z = profile_point(t, r, random_unit(rng, params.cross_dim()));
    if (classify(params, scheme, z) != expected) ++failures;
  }
  return at_most("geometry.partition." + std::string(to_string(scheme)) + tag(params), tested,
                 static_cast<double>(failures), 0.0);
}

CheckResult check_boundary_classification(const CuspParams& params, std::size_t count,
                                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, {102}));
  std::size_t failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = log_uniform(rng, std::ldexp(1.0, -20), kHalf);
    const Point z = profile_point(t, params.cusp_radius(t), random_unit(rng, params.cross_dim()));
    if (classify(params, Scheme::R1, z) != RegionLabel::BoundaryCusp) ++failures;
    if (classify(params, Scheme::R2, z) != RegionLabel::BoundaryCusp) ++failures;
  }
  return at_most("geometry.boundary_consistency" + tag(params), count, static_cast<double>(failures),
                 0.0);
}

CheckResult check_shell_measure_sums(const CuspParams& params) {
  double worst = 0.0;
  std::size_t cells = 0;
  for (RegionLabel region : all_pieces()) {
    double total = 0.0;
    for (int k = 1; k <= 40; ++k) total += shell_measure(params, region, Shell(k));
    cells += 40;
    const double exact = region_measure(params, region);
    worst = std::max(worst, std::abs(total - exact) / exact);
    worst = std::max(worst, shell_measure(params, region, Shell(0)));
  }
  return at_most("geometry.shell_measure_sum" + tag(params), cells, worst, 1e-6);
}

CheckResult check_sampler_hits(const CuspParams& params, std::uint64_t seed) {
  std::size_t total = 0;
  std::size_t failures = 0;
  std::vector<RegionLabel> regions = all_pieces();
  regions.push_back(RegionLabel::CuspInterior);
  for (RegionLabel region : regions) {
    for (int k = 1; k <= 12; ++k) {
      const Shell shell(k);
      const auto pts = sample_region(params, scheme_of(region), region, shell, 64, seed);
      const auto again = sample_region(params, scheme_of(region), region, shell, 64, seed);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        ++total;
        const ProfilePoint pz{pts[i].t, pts[i].radius()};
        const double scale = scale_variable(region, pz);
        const bool in_shell =
            scale >= shell.lower() * (1.0 - 1e-12) && scale <= shell.upper() * (1.0 + 1e-12);
        const bool same = pts[i].t == again[i].t && pts[i].x == again[i].x;
        const Scheme scheme = region == RegionLabel::CuspInterior ? Scheme::R2 : scheme_of(region);
        if (classify(params, scheme, pts[i]) != region || !in_shell || !same) ++failures;
      }
    }
  }
  return at_most("geometry.sampler_hit_rate" + tag(params), total, static_cast<double>(failures), 0.0);
}

CheckResult check_boundary_fixity(const CuspParams& params, std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {201}));
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = log_uniform(rng, std::ldexp(1.0, -20), kHalf);
    const Point z = profile_point(t, params.cusp_radius(t), random_unit(rng, params.cross_dim()));
    for (ChartId chart : {ChartId::R1Outer, ChartId::R1Inner, ChartId::R2Outer}) {
      const Point w = apply(chart, params, z);
      worst = std::max(worst, std::hypot(w.t - z.t, (w.x - z.x).norm()));
    }
  }
  return at_most("reflections.boundary_fixity" + tag(params), count * 3, worst, 1e-12);
}

CheckResult check_interface_continuity(const CuspParams& params, std::size_t pairs,
                                       std::uint64_t seed) {
  Rng rng(derive_seed(seed, {202}));
  const double s = params.degree();
  constexpr double delta = 1e-10;
  double worst = 0.0;
  std::size_t total = 0;
  const auto straddle = [&](ChartId chart, double t, double r, const Eigen::VectorXd& dir) {
    const Point lo = apply(chart, params, profile_point(t, r * (1.0 - delta), dir));
    const Point hi = apply(chart, params, profile_point(t, r * (1.0 + delta), dir));
    worst = std::max(worst, std::hypot(lo.t - hi.t, (lo.x - hi.x).norm()));
    ++total;
  };
  const auto across_boundary = [&](ChartId inside, ChartId outside, double t,
                                   const Eigen::VectorXd& dir) {
    const double r = std::pow(t, s);
    const Point b = profile_point(t, r, dir);
    const Point lo = apply(inside, params, profile_point(t, r * (1.0 - delta), dir));
    const Point hi = apply(outside, params, profile_point(t, r * (1.0 + delta), dir));
    worst = std::max(worst, std::hypot(lo.t - b.t, (lo.x - b.x).norm()));
    worst = std::max(worst, std::hypot(hi.t - b.t, (hi.x - b.x).norm()));
    ++total;
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    const double t = log_uniform(rng, std::ldexp(1.0, -12), 0.45);
    const Eigen::VectorXd dir = random_unit(rng, params.cross_dim());
    straddle(ChartId::R1Outer, -t, t, dir);                        // A | B
    straddle(ChartId::R1Outer, t, t, dir);                         // C | B
    straddle(ChartId::R2Outer, -t, std::pow(t, s), dir);           // D | E
    straddle(ChartId::R1Inner, t, std::pow(t, s) / 6.0, dir);      // piece 1 | 2
    straddle(ChartId::R1Inner, t, std::pow(t, s) / 3.0, dir);      // piece 2 | 3
    across_boundary(ChartId::R1Inner, ChartId::R1Outer, t, dir);   // piece 3 | C
    across_boundary(ChartId::R1Inner, ChartId::R2Outer, t, dir);   // piece 3 | E
  }
  return at_most("reflections.interface_continuity" + tag(params), total, worst, 1e-9);
}

CheckResult check_image_bands(const CuspParams& params, std::uint64_t seed) {
  const double s = params.degree();
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : all_pieces()) {
    const ChartId chart = chart_for_region(region);
    for (const auto& node : piece_samples(params, region, 1, 20, 32, seed)) {
      const Point w = apply(chart, params, node.point());
      const double tp = w.t;
      const double rp = w.radius();
      double lo = 0.0;
      double hi = 0.0;
      double scale = 1.0;
      bool ok_sign = true;
      switch (region) {
        case RegionLabel::RegionA: lo = 0.0; hi = 1.0 / 6.0; break;
        case RegionLabel::RegionB: lo = 1.0 / 6.0; hi = 0.5; break;
        case RegionLabel::RegionC: lo = 0.5; hi = 1.0; break;
        case RegionLabel::RegionD: lo = 0.0; hi = 0.5; break;
        case RegionLabel::RegionE: lo = 0.5; hi = 1.0; break;
        default: break;
      }
      double violation = 0.0;
      if (chart == ChartId::R1Inner) {
        // Inner pieces land in A, B and C respectively.
        const double at = std::abs(tp);
        scale = std::max(at, rp);
        if (region == RegionLabel::InnerPiece1) violation = std::max(tp, rp - at) / scale;
        if (region == RegionLabel::InnerPiece2) violation = (at - rp) / scale;
        if (region == RegionLabel::InnerPiece3) {
          violation = std::max({rp - tp, std::pow(tp, s) - rp, -tp}) / scale;
        }
      } else {
        ok_sign = tp > 0.0;
        const double ts = std::pow(tp, s);
        violation = std::max((rp - hi * ts) / ts, (lo * ts - rp) / ts);
      }
      if (!ok_sign) violation = std::max(violation, 1.0);
      worst = std::max(worst, violation);
      ++total;
    }
  }
  return at_most("reflections.image_bands" + tag(params), total, worst, 1e-12);
}

CheckResult check_equivariance(const CuspParams& params, std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {203}));
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : all_pieces()) {
    const ChartId chart = chart_for_region(region);
    const auto nodes = piece_samples(params, region, 1, 10, count / 10 + 1, seed);
    for (const auto& node : nodes) {
      const Eigen::MatrixXd rot = random_rotation(rng, params.cross_dim());
      const Point z = node.point();
      const Point w = apply(chart, params, z);
      const Point wr = apply(chart, params, Point(z.t, rot * z.x));
      const double scale = std::max(1.0, std::hypot(w.t, w.x.norm()));
      worst = std::max(worst, std::hypot(wr.t - w.t, (wr.x - rot * w.x).norm()) / scale);
      ++total;
    }
  }
  return at_most("reflections.equivariance" + tag(params), total, worst, 1e-12);
}

CheckResult check_det_recompute(const CuspParams& params, std::size_t per_piece, std::uint64_t seed) {
  const int n = params.dimension();
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : all_pieces()) {
    const ChartId chart = chart_for_region(region);
    for (const auto& node : piece_samples(params, region, 1, 20, per_piece / 20 + 1, seed)) {
      Jet jet;
      try {
        jet = differential(chart, params, node.point());
      } catch (const PreconditionError&) {
        continue;
      }
      const double det = jet.differential.determinant();
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jet.differential);
      const double sv = svd.singularValues()[0];
      worst = std::max(worst, std::abs(det - jet.det) / std::abs(jet.det));
      worst = std::max(worst, std::abs(sv - jet.opnorm) / jet.opnorm);
      if (jet.opnorm < std::pow(std::abs(jet.det), 1.0 / n) * (1.0 - 1e-12)) worst = 1.0;
      ++total;
    }
  }
  return at_most("reflections.det_opnorm_recompute" + tag(params), total, worst, 1e-10);
}

CheckResult check_jacobian_scaling(const CuspParams& params, RegionLabel region,
                                   std::uint64_t seed) {
  const ChartId chart = chart_for_region(region);
  std::vector<std::pair<double, double>> pairs;
  if (region == RegionLabel::RegionA) {
    for (const auto& node : piece_samples(params, region, 5, 20, 32, seed)) {
      const Jet jet = differential(chart, params, node.point());
      pairs.emplace_back(std::abs(node.t), std::abs(jet.det));
    }
  } else {
    for (int k = 5; k <= 20; ++k) {
      const double scale = 0.75 * std::ldexp(1.0, -k);
      const Jet jet = differential(chart, params, scaling_point(params, region, scale));
      pairs.emplace_back(scale, region == RegionLabel::RegionE ? jet.opnorm : std::abs(jet.det));
    }
  }
  const ScalingFit fit = scaling_fit(pairs);
  const double threshold = region == RegionLabel::RegionA ? 1e-6 : 0.02;
  return at_most("reflections.jacobian_scaling." + std::string(to_string(region)) + tag(params),
                 pairs.size(), std::abs(fit.slope - scaling_target(params, region)), threshold);
}

CheckResult check_opnorm_boundedness(const CuspParams& params, std::uint64_t seed) {
  std::vector<double> maxima;
  std::size_t total = 0;
  for (int k = 5; k <= 20; ++k) {
    double best = 0.0;
    for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC}) {
      for (const auto& node : quadrature_nodes(params, region, Shell(k), 128, seed)) {
        const ProfileJet j = piece_jet(params, region, node.profile());
        best = std::max(best, j.opnorm());
        ++total;
      }
    }
    maxima.push_back(best);
  }
  double running = maxima.front();
  double worst = 0.0;
  for (std::size_t i = 1; i < maxima.size(); ++i) {
    worst = std::max(worst, maxima[i] / running);
    running = std::max(running, maxima[i]);
  }
  return at_most("reflections.opnorm_bounded_ABC" + tag(params), total, worst, 1.05);
}

CheckResult check_e_distortion_band(const CuspParams& params, std::uint64_t seed) {
  const double s = params.degree();
  const DistortionField field(params, ChartId::R2Outer, RegionLabel::RegionE, {5, 20}, 512, seed);
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& [mx, mn] : field.shell_extrema(1.0, (s - 1.0) / s)) {
    hi = std::max(hi, mx);
    lo = std::min(lo, mn);
  }
  return at_most("reflections.opnorm_band_E" + tag(params), 16 * 512, hi / lo, 4.0);
}

CheckResult check_fd_agreement(const CuspParams& params, std::size_t per_piece, std::uint64_t seed,
                               bool fault) {
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : all_pieces()) {
    const ChartId chart = chart_for_region(region);
    std::size_t accepted = 0;
    for (std::uint64_t round = 0; accepted < per_piece && round < 8; ++round) {
      const auto nodes = piece_samples(params, region, 1, fd_shell_limit(params, region),
                                       per_piece / 4 + 1,
                                       derive_seed(seed, {static_cast<std::int64_t>(round)}));
      for (const auto& node : nodes) {
        if (accepted >= per_piece) break;
        const Point z = node.point();
        Eigen::MatrixXd fd;
        Jet jet;
        try {
          fd = differential_fd(chart, params, z, fd_step(z));
          jet = differential(chart, params, z);
        } catch (const PreconditionError&) {
          continue;
        }
        Eigen::MatrixXd analytic = jet.differential;
        if (fault) analytic(0, 0) = -analytic(0, 0);
        worst = std::max(worst, max_abs(analytic - fd) / max_abs(analytic));
        ++accepted;
      }
    }
    total += accepted;
    if (accepted < per_piece) worst = std::max(worst, 1.0);
  }
  return at_most(std::string("reflections.fd_agreement") + tag(params), total, worst, 1e-5);
}

CheckResult check_round_trip(const CuspParams& params, std::size_t per_piece, std::uint64_t seed) {
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : all_pieces()) {
    const ChartId chart = chart_for_region(region);
    for (const auto& node : piece_samples(params, region, 1, 20, per_piece / 20 + 1, seed)) {
      const Point z = node.point();
      const Point w = apply(chart, params, z);
      const Point back = invert(chart, params, w);
      const Point again = apply(chart, params, back);
      worst = std::max(worst, std::hypot(back.t - z.t, (back.x - z.x).norm()));
      worst = std::max(worst, std::hypot(again.t - w.t, (again.x - w.x).norm()));
      ++total;
    }
  }
  return at_most("reflections.round_trip" + tag(params), total, worst, 1e-8);
}

CheckResult check_window_consistency(const CuspParams& params, Scheme scheme, std::size_t samples,
                                     std::uint64_t seed) {
  SweepConfig config = SweepConfig::grid(params.dimension(), params.degree());
  config.schemes = {scheme};
  config.samples = samples;
  config.seed = seed;
  const auto rows = run_sweep(config);
  std::size_t cells = 0;
  std::size_t bad = 0;
  for (const auto& row : rows) {
    if (row.verdict == "WindowError") continue;
    ++cells;
    if (row.agrees == "false") ++bad;
    if (row.verdict == "Inconclusive" && row.region == "all" &&
        critical_margin(scheme, row.p, row.q, row.n, row.s) >= 0.05) {
      ++bad;
    }
  }
  return at_most("sobolev.window_consistency." + std::string(to_string(scheme)) + tag(params), cells,
                 static_cast<double>(bad), 0.0);
}

CheckResult check_shell_exponents(const CuspParams& params, std::size_t pairs, std::size_t samples,
                                  std::uint64_t seed) {
  const int n = params.dimension();
  const double s = params.degree();
  Rng rng(derive_seed(seed, {301}));
  const ShellRange shells{5, 30};
  double worst = 0.0;
  std::size_t total = 0;
  for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                             RegionLabel::RegionD, RegionLabel::RegionE}) {
    const Scheme scheme = scheme_of(region);
    const DistortionField field(params, chart_for_region(region), region, shells, samples, seed);
    for (std::size_t i = 0; i < pairs; ++i) {
      const double pm = p_min(scheme, n, s);
      double p = 0.0;
      double q = 0.0;
      for (int attempt = 0; attempt < 100; ++attempt) {
        p = 1.1 * pm + rng.uniform() * (6.0 - 1.1 * pm);
        const double q_hi = std::min(q_max(scheme, p, n, s), p) - 0.05;
        q = 1.0 + rng.uniform() * (q_hi - 1.0);
        // On E the two power laws of the |x| integral cross at exponent 0; keep clear of it.
        if (region != RegionLabel::RegionE) break;
        if (std::abs((n - 1) * s - (s - 1.0) * p * q / (p - q)) >= 0.25) break;
      }
      const ShellSum sum = field.integrate(p, q);
      std::vector<std::pair<double, double>> pts;
      double kk = 0.0;
      double sx = 0.0;
      double sy = 0.0;
      double sxx = 0.0;
      double sxy = 0.0;
      for (std::size_t j = 0; j < sum.log_contributions.size(); ++j) {
        const double x = shells.k_min + static_cast<double>(j);
        const double y = sum.log_contributions[j] / std::log(2.0);
        kk += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double slope = (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
      const double e = predicted_shell_exponent(region, p, q, n, s);
      worst = std::max(worst, std::abs(slope + (e + 1.0)));
      ++total;
    }
  }
  return at_most("sobolev.shell_exponent_match" + tag(params), total, worst, 0.05);
}

CheckResult check_exponent_curves(const CuspParams& params) {
  const int n = params.dimension();
  const double s = params.degree();
  double worst = 0.0;
  const double lo = std::max(p_min_r1(n, s), p_min_r2(n, s)) * 1.001;
  // q_max_r1 linear and increasing, q_max_r2 increasing and concave.
  for (int i = 0; i < 200; ++i) {
    const double p = lo + 0.05 * i;
    const double h = 0.05;
    const double d1 = q_max_r1(p + h, n, s) - q_max_r1(p, n, s);
    const double d1b = q_max_r1(p + 2 * h, n, s) - q_max_r1(p + h, n, s);
    const double d2 = q_max_r2(p + h, n, s) - q_max_r2(p, n, s);
    const double d2b = q_max_r2(p + 2 * h, n, s) - q_max_r2(p + h, n, s);
    if (!(d1 > 0.0) || !(d2 > 0.0) || !(d2b < d2)) worst = std::max(worst, 1.0);
    worst = std::max(worst, std::abs(d1b - d1) / d1 * 1e-3);
  }
  const double asymptote = (1.0 + (n - 1) * s) / (s - 1.0);
  worst = std::max(worst, std::abs(q_max_r2(1e12, n, s) - asymptote) / asymptote);
  // Crossing point by bisection.
  double a = lo;
  double b = 1e3;
  const auto f = [&](double p) { return q_max_r1(p, n, s) - q_max_r2(p, n, s); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    ((f(mid) < 0.0) == (f(a) < 0.0) ? a : b) = mid;
  }
  const double ps = p_star(n, s);
  worst = std::max(worst, std::abs(0.5 * (a + b) - ps));
  worst = std::max(worst, std::abs(q_max_r1(ps, n, s) - (n - 1)));
  worst = std::max(worst, std::abs(q_max_r2(ps, n, s) - (n - 1)));
  return at_most("sobolev.critical_curves" + tag(params), 200, worst, 1e-9);
}

CheckResult check_dual_exponent(int n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {302}));
  double worst = std::abs(dual_exponent(n, n) - n);
  // Hoelder conjugation in the plane; for n >= 3 the double dual has the closed form
  // p / (p (2 - n) + (n - 1)^2), defined while the first dual stays above n - 1.
  const double a = n - 1.0;
  const double hi = n == 2 ? 1e3 : a * a / (n - 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = a + (hi - a) * (1e-3 + 0.998 * rng.uniform());
    const double twice = dual_exponent(dual_exponent(p, n), n);
    const double expected = p / (p * (2.0 - n) + a * a);
    worst = std::max(worst, std::abs(twice - expected) / expected);
    if (n == 2) worst = std::max(worst, std::abs(twice - p) / p);
  }
  return at_most("sobolev.dual_exponent[n=" + std::to_string(n) + "]", 1001, worst, 1e-12);
}

CheckResult check_native_identity(const CuspParams& params, std::uint64_t seed) {
  const TestFunction funcs[] = {PowerAlpha{0.7}, ClampT{},
                                RadialBump{Point::on_axis_plane(params.dimension(), 0.1, 0.0), 0.3}};
  std::size_t total = 0;
  std::size_t failures = 0;
  const auto check = [&](const ExtensionSpec& spec, const std::vector<QuadratureNode>& nodes) {
    for (const auto& node : nodes) {
      for (const auto& u : funcs) {
        ++total;
        if (extend_eval(spec, params, u, node.point()) != u.value(node.point())) ++failures;
      }
    }
  };
  const auto cusp = piece_samples(params, RegionLabel::CuspInterior, 1, 12, 32, seed);
  check({Scheme::R1, Direction::FromInside}, cusp);
  check({Scheme::R2, Direction::FromInside}, cusp);
  for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC}) {
    check({Scheme::R1, Direction::FromOutside}, piece_samples(params, region, 1, 12, 32, seed));
  }
  return at_most("extension.native_identity" + tag(params), total, static_cast<double>(failures), 0.0);
}

CheckResult check_trace_matching(const CuspParams& params, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {401}));
  const TestFunction funcs[] = {ClampT{},
                                RadialBump{Point::on_axis_plane(params.dimension(), 0.1, 0.0), 0.3}};
  constexpr double delta = 1e-10;
  double worst = 0.0;
  std::size_t total = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = log_uniform(rng, std::ldexp(1.0, -10), 0.45);
    const double r = params.cusp_radius(t);
    const Eigen::VectorXd dir = random_unit(rng, params.cross_dim());
    const Point in = profile_point(t, r * (1.0 - delta), dir);
    const Point out = profile_point(t, r * (1.0 + delta), dir);
    for (const auto& u : funcs) {
      for (const ExtensionSpec spec : {ExtensionSpec{Scheme::R1, Direction::FromInside},
                                       ExtensionSpec{Scheme::R2, Direction::FromInside},
                                       ExtensionSpec{Scheme::R1, Direction::FromOutside}}) {
        worst = std::max(worst, std::abs(extend_eval(spec, params, u, in) -
                                         extend_eval(spec, params, u, out)));
        ++total;
      }
    }
  }
  return at_most("extension.trace_matching" + tag(params), total, worst, 1e-8);
}

CheckResult check_cutoff_product(const CuspParams& params, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {402}));
  const TestFunction u = RadialBump{Point::on_axis_plane(params.dimension(), 0.1, 0.0), 0.6};
  const ExtensionSpec spec{Scheme::R1, Direction::FromInside};
  std::size_t failures = 0;
  constexpr std::size_t count = 20000;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = -1.0 + 2.5 * rng.uniform();
    const double r = 1.2 * rng.uniform();
    const Point z = profile_point(t, r, random_unit(rng, params.cross_dim()));
    const double psi = cutoff_psi(params, z);
    if (!(psi >= 0.0 && psi <= 1.0)) ++failures;
    const RegionLabel label = classify(params, Scheme::R1, z);
    if (label == RegionLabel::OutsideNeighborhood) {
      if (extend_global(spec, params, u, z) != 0.0 || psi != 0.0) ++failures;
    } else if (label == RegionLabel::CuspInterior || label == RegionLabel::BallInterior ||
               label == RegionLabel::InnerPiece1 || label == RegionLabel::InnerPiece2 ||
               label == RegionLabel::InnerPiece3) {
      if (extend_global(spec, params, u, z) != u.value(z) || psi != 1.0) ++failures;
    }
  }
  return at_most("extension.cutoff_product" + tag(params), count, static_cast<double>(failures), 0.0);
}

CheckResult check_test_function_gradients(const CuspParams& params, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {403}));
  const int n = params.dimension();
  const TestFunction funcs[] = {PowerAlpha{0.7}, ClampT{},
                                RadialBump{Point::on_axis_plane(n, 0.3, 0.1), 0.4}, Constant{2.5}};
  double worst = 0.0;
  std::size_t total = 0;
  for (const auto& u : funcs) {
    std::size_t done = 0;
    while (done < 200) {
      const double t = 0.05 + 0.9 * rng.uniform();
      Eigen::VectorXd x(n - 1);
      for (int i = 0; i < n - 1; ++i) x[i] = 0.4 * (rng.uniform() - 0.5);
      const Point z(t, x);
      const Eigen::VectorXd g = u.gradient(z);
      if (std::holds_alternative<RadialBump>(u.variant())) {
        const auto& bump = std::get<RadialBump>(u.variant());
        const double dt = z.t - bump.center.t;
        const double q = (dt * dt + (z.x - bump.center.x).squaredNorm()) / (bump.radius * bump.radius);
        if (q > 0.9 || g.norm() < 1e-3) continue;
      }
      const double h = 1e-6 * std::max(1.0, z.norm());
      Eigen::VectorXd fd(n);
      for (int j = 0; j < n; ++j) {
        Point a = z;
        Point b = z;
        if (j == 0) {
          a.t += h;
          b.t -= h;
        } else {
          a.x[j - 1] += h;
          b.x[j - 1] -= h;
        }
        fd[j] = (u.value(a) - u.value(b)) / (2.0 * h);
      }
      const double gn = g.cwiseAbs().maxCoeff();
      const double err = (g - fd).cwiseAbs().maxCoeff();
      worst = std::max(worst, gn > 0.0 ? err / gn : err);
      ++done;
      ++total;
    }
  }
  return at_most("extension.test_function_gradient" + tag(params), total, worst, 1e-6);
}

CheckResult check_extension_gradient_fd(const CuspParams& params, std::uint64_t seed) {
  const int n = params.dimension();
  const TestFunction bump = RadialBump{Point::on_axis_plane(n, 0.05, 0.0), 1.0};
  const TestFunction power = PowerAlpha{1.4};
  const TestFunction clamp = ClampT{};
  struct Case {
    ExtensionSpec spec;
    const TestFunction* u;
  };
  const Case cases[] = {
      {{Scheme::R1, Direction::FromInside}, &power},  {{Scheme::R1, Direction::FromInside}, &bump},
      {{Scheme::R2, Direction::FromInside}, &power},  {{Scheme::R2, Direction::FromInside}, &bump},
      {{Scheme::R1, Direction::FromOutside}, &clamp}, {{Scheme::R1, Direction::FromOutside}, &bump},
  };
  double worst = 0.0;
  std::size_t total = 0;
  for (const auto& c : cases) {
    const ChartId chart = c.spec.chart();
    for (RegionLabel region : c.spec.extension_regions()) {
      std::size_t done = 0;
      for (const auto& node : piece_samples(params, region, 1, 4, 16, seed)) {
        if (done >= 20) break;
        const Point z = node.point();
        const double h = fd_step(z);
        try {
          differential_fd(chart, params, z, h);
        } catch (const PreconditionError&) {
          continue;
        }
        const Eigen::VectorXd g = extend_gradient(c.spec, params, *c.u, z);
        Eigen::VectorXd fd(n);
        for (int j = 0; j < n; ++j) {
          Point a = z;
          Point b = z;
          if (j == 0) {
            a.t += h;
            b.t -= h;
          } else {
            a.x[j - 1] += h;
            b.x[j - 1] -= h;
          }
          fd[j] = (extend_eval(c.spec, params, *c.u, a) - extend_eval(c.spec, params, *c.u, b)) /
                  (2.0 * h);
        }
        const double gn = g.cwiseAbs().maxCoeff();
        const double err = (g - fd).cwiseAbs().maxCoeff();
        worst = std::max(worst, gn > 1e-12 ? err / gn : err);
        ++done;
        ++total;
      }
    }
  }
  return at_most("extension.gradient_fd" + tag(params), total, worst, 1e-5);
}

CheckResult check_w1inf_positive(const CuspParams& params, std::uint64_t seed) {
  const auto maxima = gradient_shell_maxima({Scheme::R1, Direction::FromInside}, params, ClampT{},
                                            {5, 20}, 256, seed);
  double early = 0.0;
  for (std::size_t i = 0; i < 8; ++i) early = std::max(early, maxima[i]);
  double running = maxima.front();
  double worst = 0.0;
  for (std::size_t i = 1; i < maxima.size(); ++i) {
    worst = std::max(worst, maxima[i] / running);
    worst = std::max(worst, maxima[i] / early);
    running = std::max(running, maxima[i]);
  }
  return at_most("extension.w1inf_gradient_bounded" + tag(params), maxima.size() * 256 * 3, worst,
                 1.05);
}

CheckResult check_holder_negative(const CuspParams& params) {
  std::vector<double> ts;
  for (int k = 3; k <= 10; ++k) ts.push_back(std::ldexp(1.0, -k));
  const HolderProbe probe = holder_probe(params, ts);
  const double target = 1.0 / params.degree();
  const double err = std::abs(probe.fit.slope - target);
  return make("extension.holder_exponent" + tag(params), ts.size(), err, 0.02,
              err <= 0.02 && probe.fit.slope < 1.0 && probe.fit.residual < 1e-3);
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  if (!(options.s > 1.0)) throw WindowError("cusp degree must satisfy s > 1");
  const CuspParams params(options.n, options.s);
  const std::uint64_t seed = options.seed;
  std::vector<CheckResult> out;
  out.push_back(check_partition(params, Scheme::R1, 100000, seed));
  out.push_back(check_partition(params, Scheme::R2, 100000, seed));
  out.push_back(check_boundary_classification(params, 10000, seed));
  out.push_back(check_shell_measure_sums(params));
  out.push_back(check_sampler_hits(params, seed));
  out.push_back(check_boundary_fixity(params, 10000, seed));
  out.push_back(check_interface_continuity(params, 1000, seed));
  out.push_back(check_image_bands(params, seed));
  out.push_back(check_equivariance(params, 200, seed));
  out.push_back(check_det_recompute(params, 400, seed));
  for (RegionLabel region : {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                             RegionLabel::RegionD, RegionLabel::RegionE}) {
    out.push_back(check_jacobian_scaling(params, region, seed));
  }
  out.push_back(check_opnorm_boundedness(params, seed));
  out.push_back(check_e_distortion_band(params, seed));
  out.push_back(check_fd_agreement(params, 1000, seed, options.fault_negate_entry));
  out.push_back(check_round_trip(params, 1000, seed));
  out.push_back(check_window_consistency(params, Scheme::R1, options.sweep_samples, seed));
  out.push_back(check_window_consistency(params, Scheme::R2, options.sweep_samples, seed));
  out.push_back(check_shell_exponents(params, 10, options.sweep_samples, seed));
  out.push_back(check_exponent_curves(params));
  out.push_back(check_dual_exponent(2, seed));
  out.push_back(check_dual_exponent(options.n, seed));
  out.push_back(check_native_identity(params, seed));
  out.push_back(check_trace_matching(params, seed));
  out.push_back(check_cutoff_product(params, seed));
  out.push_back(check_test_function_gradients(params, seed));
  out.push_back(check_extension_gradient_fd(params, seed));
  out.push_back(check_w1inf_positive(params, seed));
  out.push_back(check_holder_negative(params));
  return out;
}

std::string verify_csv(const std::vector<CheckResult>& results) {
  std::string out = kVerifyHeader;
  out += '\n';
  for (const auto& r : results) {
    out += r.csv();
    out += '\n';
  }
  return out;
}

}  // namespace cuspext
