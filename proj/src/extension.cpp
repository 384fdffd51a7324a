#include "cuspext/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cuspext/random.hpp"

namespace cuspext {

namespace {

constexpr double kHalf = 0.5;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_extension_side(const ExtensionSpec& spec, RegionLabel label) {
  const auto regions = spec.extension_regions();
  return std::find(regions.begin(), regions.end(), label) != regions.end();
}

bool in_closed_cusp(const CuspParams& params, ProfilePoint z) {
  if ((z.t - 2.0) * (z.t - 2.0) + z.r * z.r <= 2.0) return true;
  return z.t >= 0.0 && z.t <= 1.0 && z.r <= params.cusp_radius(z.t) * (1.0 + kClassifyTolerance);
}

// Which side of the extension a point falls on.
enum class Side { Native, Extension, Boundary };

Side side_of(const ExtensionSpec& spec, const CuspParams& params, const Point& z,
             RegionLabel& piece) {
  spec.validate();
  const ProfilePoint pz{z.t, z.radius()};
  const RegionLabel label = classify(params, spec.scheme, z);
  if (label == RegionLabel::BoundaryCusp || label == RegionLabel::Origin) return Side::Boundary;
  if (spec.direction == Direction::FromInside) {
    if (label == RegionLabel::CuspInterior || label == RegionLabel::BallInterior ||
        label == RegionLabel::InnerPiece1 || label == RegionLabel::InnerPiece2 ||
        label == RegionLabel::InnerPiece3) {
      return Side::Native;
    }
    if (is_extension_side(spec, label)) {
      piece = label;
      return Side::Extension;
    }
    throw DomainError("outward extension is not defined at a point in " +
                          std::string(to_string(label)),
                      label);
  }
  if (label == RegionLabel::RegionA || label == RegionLabel::RegionB ||
      label == RegionLabel::RegionC || label == RegionLabel::OutsideNeighborhood) {
    return Side::Native;
  }
  piece = chart_piece(ChartId::R1Inner, params, pz);
  return Side::Extension;
}

double distance_to_segment(ProfilePoint z, ProfilePoint a, ProfilePoint b) {
  const double dx = b.t - a.t;
  const double dy = b.r - a.r;
  const double len2 = dx * dx + dy * dy;
  double u = len2 > 0.0 ? ((z.t - a.t) * dx + (z.r - a.r) * dy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(z.t - (a.t + u * dx), z.r - (a.r + u * dy));
}

// First height where the cusp profile enters the ball B((2,0), sqrt 2).
double ball_entry(double s) {
  const double lo0 = 2.0 - std::numbers::sqrt2;
  const auto f = [s](double t) { return (t - 2.0) * (t - 2.0) + std::pow(t, 2.0 * s) - 2.0; };
  constexpr int kScan = 2000;
  double prev = lo0;
  for (int i = 1; i <= kScan; ++i) {
    const double t = lo0 + (1.0 - lo0) * i / kScan;
    if (f(t) < 0.0) {
      double lo = prev;
      double hi = t;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = t;
  }
  return 1.0;
}

double distance_to_profile_curve(double s, ProfilePoint z, double t_lo, double t_hi) {
  const auto g = [&](double t) { return std::hypot(z.t - t, z.r - std::pow(t, s)); };
  constexpr int kGrid = 256;
  int best = 0;
  double best_val = g(t_lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = g(t_lo + (t_hi - t_lo) * i / kGrid);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = t_lo + (t_hi - t_lo) * std::max(best - 1, 0) / kGrid;
  double b = t_lo + (t_hi - t_lo) * std::min(best + 1, kGrid) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    (g(c) < g(d) ? b : a) = (g(c) < g(d) ? d : c);
  }
  return std::min(best_val, g(0.5 * (a + b)));
}

}  // namespace

void ExtensionSpec::validate() const {
  if (direction == Direction::FromOutside && scheme == Scheme::R2) {
    throw ParameterError("inward extension is only available for the first reflection");
  }
}

ChartId ExtensionSpec::chart() const {
  validate();
  if (direction == Direction::FromOutside) return ChartId::R1Inner;
  return scheme == Scheme::R1 ? ChartId::R1Outer : ChartId::R2Outer;
}

std::vector<RegionLabel> ExtensionSpec::extension_regions() const {
  validate();
  if (direction == Direction::FromOutside) {
    return {RegionLabel::InnerPiece1, RegionLabel::InnerPiece2, RegionLabel::InnerPiece3};
  }
  if (scheme == Scheme::R1) return {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC};
  return {RegionLabel::RegionD, RegionLabel::RegionE};
}

double extend_eval(const ExtensionSpec& spec, const CuspParams& params, const TestFunction& u,
                   const Point& z) {
  RegionLabel piece = RegionLabel::Origin;
  switch (side_of(spec, params, z, piece)) {
    case Side::Native: return u.value(z);
    case Side::Boundary: return 0.0;
    case Side::Extension: return u.value(apply(spec.chart(), params, z));
  }
  return 0.0;
}

Eigen::VectorXd extend_gradient(const ExtensionSpec& spec, const CuspParams& params,
                                const TestFunction& u, const Point& z) {
  RegionLabel piece = RegionLabel::Origin;
  switch (side_of(spec, params, z, piece)) {
    case Side::Native: return u.gradient(z);
    case Side::Boundary: throw PreconditionError("no gradient on the boundary of the cusp");
    case Side::Extension: {
      const Jet jet = differential(spec.chart(), params, z);
      return jet.differential.transpose() * u.gradient(jet.image);
    }
  }
  return {};
}

double distance_to_complement(const CuspParams& params, ProfilePoint z) {
  const double s = params.degree();
  const double neck = std::pow(kHalf, s);
  double d = z.t + kHalf;
  d = std::min(d, distance_to_segment(z, {-kHalf, kHalf}, {kHalf, kHalf}));
  d = std::min(d, distance_to_segment(z, {kHalf, neck}, {kHalf, kHalf}));
  const double tb = ball_entry(s);
  d = std::min(d, distance_to_profile_curve(s, z, kHalf, tb));
  // Arc of the ball boundary lying outside the cusp, angles measured from the leftmost point.
  const double root2 = std::numbers::sqrt2;
  const double theta_b = std::acos(std::clamp((2.0 - tb) / root2, -1.0, 1.0));
  const double theta_z = std::atan2(z.r, 2.0 - z.t);
  if (theta_z >= theta_b) {
    d = std::min(d, std::abs(std::hypot(z.t - 2.0, z.r) - root2));
  } else {
    const ProfilePoint end{2.0 - root2 * std::cos(theta_b), root2 * std::sin(theta_b)};
    d = std::min(d, std::hypot(z.t - end.t, z.r - end.r));
  }
  return std::max(d, 0.0);
}

double cutoff_psi(const CuspParams& params, const Point& z) {
  const ProfilePoint pz{z.t, z.radius()};
  if (in_closed_cusp(params, pz)) return 1.0;
  const bool in_box = std::abs(pz.t) < kHalf && pz.r < kHalf;
  if (!in_box) return 0.0;
  return std::min(1.0, distance_to_complement(params, pz) / kCutoffWidth);
}

double extend_global(const ExtensionSpec& spec, const CuspParams& params, const TestFunction& u,
                     const Point& z) {
  spec.validate();
  if (spec.direction != Direction::FromInside) {
    throw ParameterError("the cutoff extension applies to the outward direction");
  }
  const double psi = cutoff_psi(params, z);
  if (psi == 0.0) return 0.0;
  if (spec.scheme == Scheme::R2) {
    // The R2 neighbourhood is thinner than the cutoff support.
    const RegionLabel label = classify(params, Scheme::R2, z);
    if (label == RegionLabel::OutsideNeighborhood) return 0.0;
  }
  return psi * extend_eval(spec, params, u, z);
}

bool membership_oracle(double alpha, double p, int n, double s) {
  CuspParams(n, s);
  if (!(alpha > 0.0)) throw ParameterError("power exponent must be positive");
  if (!(p >= 1.0)) throw WindowError("Sobolev exponent needs p >= 1");
  return alpha + 1.0 < (1.0 + (n - 1) * s) / p;
}

bool membership_oracle(const TestFunction& u, double p, int n, double s) {
  if (const auto* f = std::get_if<PowerAlpha>(&u.variant())) return membership_oracle(f->alpha, p, n, s);
  CuspParams(n, s);
  return true;
}

ExtensionNormReport extension_norm_experiment(const ExtensionSpec& spec, const CuspParams& params,
                                              const TestFunction& u, double p, double q,
                                              ShellRange shells, std::size_t samples,
                                              std::uint64_t seed) {
  spec.validate();
  if (!(q >= 1.0 && q <= p)) throw WindowError("extension norms need 1 <= q <= p");
  if (spec.direction == Direction::FromInside &&
      !membership_oracle(u, p, params.dimension(), params.degree())) {
    throw WindowError("test function is not in W^{1,p} of the cusp for p=" + std::to_string(p));
  }
  const std::size_t m = static_cast<std::size_t>(shells.count());
  std::vector<std::vector<double>> value_logs;
  std::vector<std::vector<double>> grad_logs;
  const ChartId chart = spec.chart();
  for (RegionLabel region : spec.extension_regions()) {
    const std::uint64_t rs = derive_seed(seed, {static_cast<std::int64_t>(region)});
    const ShellSum v = shell_integral(params, region, shells, samples, rs, SamplingMode::Uniform,
                                      [&](const QuadratureNode& node) {
                                        const double val = std::abs(u.value(apply(chart, params, node.point())));
                                        return val > 0.0 ? q * std::log(val) : kNegInf;
                                      });
    const ShellSum g = shell_integral(params, region, shells, samples, rs, SamplingMode::Uniform,
                                      [&](const QuadratureNode& node) {
                                        const double val = extend_gradient(spec, params, u, node.point()).norm();
                                        return val > 0.0 ? q * std::log(val) : kNegInf;
                                      });
    value_logs.push_back(v.log_contributions);
    grad_logs.push_back(g.log_contributions);
  }
  const auto combine = [m](const std::vector<std::vector<double>>& parts) {
    std::vector<double> out(m, kNegInf);
    for (std::size_t k = 0; k < m; ++k) {
      double hi = kNegInf;
      for (const auto& part : parts) hi = std::max(hi, part[k]);
      if (hi == kNegInf) continue;
      double acc = 0.0;
      for (const auto& part : parts) acc += std::exp(part[k] - hi);
      out[k] = hi + std::log(acc);
    }
    return out;
  };
  ExtensionNormReport rep;
  rep.value_term = ShellSum::from_logs(shells, combine(value_logs));
  rep.grad_term = ShellSum::from_logs(shells, combine(grad_logs));
  rep.combined = ShellSum::from_logs(shells, combine({rep.value_term.log_contributions,
                                                      rep.grad_term.log_contributions}));
  rep.verdict = convergence_verdict(rep.combined);
  rep.lq_value = std::pow(rep.value_term.total(), 1.0 / q);
  rep.lq_grad = std::pow(rep.grad_term.total(), 1.0 / q);

  // Source norm over the native side, whole scale range below 1/2.
  const ShellRange full{1, shells.k_max};
  const std::vector<RegionLabel> native =
      spec.direction == Direction::FromInside
          ? std::vector<RegionLabel>{RegionLabel::CuspInterior}
          : std::vector<RegionLabel>{RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC};
  double lp_value = 0.0;
  double lp_grad = 0.0;
  for (RegionLabel region : native) {
    const std::uint64_t rs = derive_seed(seed, {static_cast<std::int64_t>(region), 1});
    lp_value += shell_integral(params, region, full, samples, rs, SamplingMode::Uniform,
                               [&](const QuadratureNode& node) {
                                 const double val = std::abs(u.value(node.point()));
                                 return val > 0.0 ? p * std::log(val) : kNegInf;
                               })
                    .total();
    lp_grad += sobolev_seminorm(params, u, region, p, full, samples, rs).total();
  }
  rep.source_norm = std::pow(lp_value, 1.0 / p) + std::pow(lp_grad, 1.0 / p);
  rep.ratio = rep.source_norm > 0.0 ? (rep.lq_value + rep.lq_grad) / rep.source_norm
                                    : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

std::vector<double> gradient_shell_maxima(const ExtensionSpec& spec, const CuspParams& params,
                                          const TestFunction& u, ShellRange shells,
                                          std::size_t samples, std::uint64_t seed) {
  std::vector<double> maxima(static_cast<std::size_t>(shells.count()), 0.0);
  for (RegionLabel region : spec.extension_regions()) {
    const std::uint64_t rs = derive_seed(seed, {static_cast<std::int64_t>(region)});
    for (int k = shells.k_min; k <= shells.k_max; ++k) {
      const Shell shell(k);
      if (shell_measure(params, region, shell) <= 0.0) continue;
      double& best = maxima[static_cast<std::size_t>(k - shells.k_min)];
      for (const auto& node : quadrature_nodes(params, region, shell, samples, rs)) {
        try {
          best = std::max(best, extend_gradient(spec, params, u, node.point()).norm());
        } catch (const PreconditionError&) {
        }
      }
    }
  }
  return maxima;
}

HolderProbe holder_probe(const CuspParams& params, const std::vector<double>& t_values) {
  if (t_values.size() < 3) throw ParameterError("holder probe needs at least 3 heights");
  const ExtensionSpec spec{Scheme::R1, Direction::FromOutside};
  const TestFunction u = ClampT{};
  HolderProbe probe;
  for (double t : t_values) {
    if (!(t > 0.0 && t < kHalf)) throw ParameterError("holder probe heights must lie in (0, 1/2)");
    const double rb = params.cusp_radius(t);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < kHolderRadii; ++j) {
      const Point z = Point::on_axis_plane(params.dimension(), t, rb * j / kHolderRadii);
      const double v = extend_eval(spec, params, u, z);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    probe.rows.push_back({t, hi - lo, 2.0 * rb});
  }
  std::vector<std::pair<double, double>> pairs;
  for (const auto& row : probe.rows) pairs.emplace_back(row.diam, row.osc);
  probe.fit = scaling_fit(pairs);
  return probe;
}

}  // namespace cuspext
