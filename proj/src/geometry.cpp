#include "cuspext/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cuspext/random.hpp"

namespace cuspext {

namespace {

constexpr double kHalf = 0.5;

bool finite(double v) { return std::isfinite(v); }

// Inverse CDF of the density proportional to x^e on [a, b].
double power_law_quantile(double a, double b, double e, double u) {
  const double ratio = std::pow(a / b, e + 1.0);
  return b * std::pow(ratio + u * (1.0 - ratio), 1.0 / (e + 1.0));
}

// Inverse of a monotone increasing cumulative function on [a, b] by bisection.
template <typename Cdf>
double bisect_quantile(double a, double b, double u, Cdf cdf) {
  const double fa = cdf(a);
  const double target = fa + u * (cdf(b) - fa);
  double lo = a;
  double hi = b;
  for (int it = 0; it < 100 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Radial band [lo, hi] of an inner piece, as fractions of t^s.
std::array<double, 2> cusp_band(RegionLabel label) {
  switch (label) {
    case RegionLabel::InnerPiece1:
      return {0.0, 1.0 / 6.0};
    case RegionLabel::InnerPiece2:
      return {1.0 / 6.0, 1.0 / 3.0};
    case RegionLabel::InnerPiece3:
      return {1.0 / 3.0, 1.0};
    default:
      return {0.0, 1.0};
  }
}

// Shell interval clipped to the scale range (0, 1/2) shared by all sampleable regions.
bool clipped_interval(const Shell& shell, double& a, double& b) {
  a = std::max(shell.lower(), 0.0);
  b = std::min(shell.upper(), kHalf);
  return b > a;
}

Eigen::VectorXd random_direction(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

}  // namespace

CuspParams::CuspParams(int dimension, double degree) : dimension_(dimension), degree_(degree) {
  if (dimension < 3) {
    throw ParameterError("dimension must be at least 3, got " + std::to_string(dimension));
  }
  if (!finite(degree) || !(degree > 1.0)) {
    throw ParameterError("cusp degree must satisfy s > 1, got " + std::to_string(degree));
  }
}

double CuspParams::cusp_radius(double t) const { return std::pow(t, degree_); }

Point Point::from_coords(std::span<const double> coords) {
  if (coords.size() < 3) {
    throw ParameterError("a point needs at least 3 coordinates");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(coords.size() - 1));
  for (std::size_t i = 1; i < coords.size(); ++i) x[static_cast<Eigen::Index>(i - 1)] = coords[i];
  return Point(coords[0], std::move(x));
}

Point Point::on_axis_plane(int dimension, double t, double r) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension - 1);
  x[0] = r;
  return Point(t, std::move(x));
}

double Point::norm() const { return std::sqrt(t * t + x.squaredNorm()); }

std::vector<double> Point::coords() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.size()) + 1);
  out.push_back(t);
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x[i]);
  return out;
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::CuspInterior: return "CuspInterior";
    case RegionLabel::BallInterior: return "BallInterior";
    case RegionLabel::BoundaryCusp: return "BoundaryCusp";
    case RegionLabel::RegionA: return "RegionA";
    case RegionLabel::RegionB: return "RegionB";
    case RegionLabel::RegionC: return "RegionC";
    case RegionLabel::RegionD: return "RegionD";
    case RegionLabel::RegionE: return "RegionE";
    case RegionLabel::InnerPiece1: return "InnerPiece1";
    case RegionLabel::InnerPiece2: return "InnerPiece2";
    case RegionLabel::InnerPiece3: return "InnerPiece3";
    case RegionLabel::OutsideNeighborhood: return "OutsideNeighborhood";
    case RegionLabel::Origin: return "Origin";
  }
  return "?";
}

std::string_view to_string(Scheme scheme) { return scheme == Scheme::R1 ? "r1" : "r2"; }

RegionLabel region_from_string(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, RegionLabel>, 13> kShort{{
      {"A", RegionLabel::RegionA},
      {"B", RegionLabel::RegionB},
      {"C", RegionLabel::RegionC},
      {"D", RegionLabel::RegionD},
      {"E", RegionLabel::RegionE},
      {"cusp", RegionLabel::CuspInterior},
      {"inner1", RegionLabel::InnerPiece1},
      {"inner2", RegionLabel::InnerPiece2},
      {"inner3", RegionLabel::InnerPiece3},
      {"ball", RegionLabel::BallInterior},
      {"boundary", RegionLabel::BoundaryCusp},
      {"outside", RegionLabel::OutsideNeighborhood},
      {"origin", RegionLabel::Origin},
  }};
  for (const auto& [key, label] : kShort) {
    if (name == key || name == to_string(label)) return label;
  }
  throw ParameterError("unknown region '" + std::string(name) + "'");
}

Shell::Shell(int k) : k_(k) {
  if (k < 0) throw ParameterError("shell index must be nonnegative");
}

double Shell::lower() const { return std::ldexp(1.0, -k_ - 1); }
double Shell::upper() const { return std::ldexp(1.0, -k_); }

RegionLabel classify(const CuspParams& params, Scheme scheme, const Point& z) {
  if (z.dimension() != params.dimension()) {
    throw ParameterError("point dimension does not match n");
  }
  if (!finite(z.t) || !z.x.allFinite()) {
    throw ParameterError("non-finite coordinate");
  }
  return classify_profile(params, scheme, {z.t, z.radius()});
}

RegionLabel classify_profile(const CuspParams& params, Scheme scheme, ProfilePoint z) {
  const double t = z.t;
  const double r = z.r;
  if (!finite(t) || !finite(r) || r < 0.0) {
    throw ParameterError("non-finite or negative profile coordinate");
  }
  const double tau = kClassifyTolerance;
  const double norm = std::hypot(t, r);
  if (norm <= tau) return RegionLabel::Origin;

  const double s = params.degree();
  const bool in_ball = (t - 2.0) * (t - 2.0) + r * r < 2.0;
  bool in_cusp = false;
  if (t > 0.0 && t <= 1.0) {
    const double rb = std::pow(t, s);
    if (std::abs(r - rb) <= tau * rb && !in_ball) return RegionLabel::BoundaryCusp;
    in_cusp = r < rb;
  }

  if (in_cusp || in_ball) {
    if (scheme == Scheme::R1 && in_cusp && t < kHalf) {
      const double rb = std::pow(t, s);
      if (r <= rb / 6.0 * (1.0 + tau)) return RegionLabel::InnerPiece1;
      if (r <= rb / 3.0 * (1.0 + tau)) return RegionLabel::InnerPiece2;
      return RegionLabel::InnerPiece3;
    }
    return in_cusp ? RegionLabel::CuspInterior : RegionLabel::BallInterior;
  }

  if (scheme == Scheme::R1) {
    if (!(std::abs(t) < kHalf && r < kHalf)) return RegionLabel::OutsideNeighborhood;
    const double at = std::abs(t);
    if (t <= 0.0 && r <= at + tau * norm) return RegionLabel::RegionA;
    if (r >= at - tau * norm) return RegionLabel::RegionB;
    return RegionLabel::RegionC;
  }

  if (!(std::abs(t) < kHalf && r < std::pow(kHalf, s))) return RegionLabel::OutsideNeighborhood;
  if (t <= 0.0 && r <= std::pow(-t, s) * (1.0 + tau)) return RegionLabel::RegionD;
  return RegionLabel::RegionE;
}

bool is_sampleable(RegionLabel label) {
  switch (label) {
    case RegionLabel::CuspInterior:
    case RegionLabel::RegionA:
    case RegionLabel::RegionB:
    case RegionLabel::RegionC:
    case RegionLabel::RegionD:
    case RegionLabel::RegionE:
    case RegionLabel::InnerPiece1:
    case RegionLabel::InnerPiece2:
    case RegionLabel::InnerPiece3:
      return true;
    default:
      return false;
  }
}

Scheme scheme_of(RegionLabel label) {
  return (label == RegionLabel::RegionD || label == RegionLabel::RegionE) ? Scheme::R2 : Scheme::R1;
}

double scale_variable(RegionLabel label, ProfilePoint z) {
  return label == RegionLabel::RegionB ? z.r : std::abs(z.t);
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace {

// Volume of the region between scale values a < b (already clipped).
double slab_measure(const CuspParams& params, RegionLabel label, double a, double b) {
  const int n = params.dimension();
  const double m = params.degree() * (n - 1);
  const double v = unit_ball_volume(n - 1);
  const auto integral_pow = [](double lo, double hi, double e) {
    return (std::pow(hi, e + 1.0) - std::pow(lo, e + 1.0)) / (e + 1.0);
  };
  const double cusp = v * integral_pow(a, b, m);
  switch (label) {
    case RegionLabel::CuspInterior:
    case RegionLabel::RegionD:
      return cusp;
    case RegionLabel::InnerPiece1:
    case RegionLabel::InnerPiece2:
    case RegionLabel::InnerPiece3: {
      const auto [lo, hi] = cusp_band(label);
      return cusp * (std::pow(hi, n - 1) - std::pow(lo, n - 1));
    }
    case RegionLabel::RegionA:
      return v * integral_pow(a, b, n - 1);
    case RegionLabel::RegionB:
      return 2.0 * unit_sphere_area(n - 1) * integral_pow(a, b, n - 1);
    case RegionLabel::RegionC:
      return v * integral_pow(a, b, n - 1) - cusp;
    case RegionLabel::RegionE: {
      const double cap = std::pow(kHalf, m);
      return 2.0 * (v * cap * (b - a) - cusp);
    }
    default:
      throw ParameterError("region " + std::string(to_string(label)) + " has no shell measure");
  }
}

}  // namespace

double shell_measure(const CuspParams& params, RegionLabel label, const Shell& shell) {
  if (!is_sampleable(label)) {
    throw ParameterError("region " + std::string(to_string(label)) + " has no shell measure");
  }
  double a = 0.0;
  double b = 0.0;
  if (!clipped_interval(shell, a, b)) return 0.0;
  return slab_measure(params, label, a, b);
}

double region_measure(const CuspParams& params, RegionLabel label) {
  if (!is_sampleable(label)) {
    throw ParameterError("region " + std::string(to_string(label)) + " has no measure");
  }
  return slab_measure(params, label, 0.0, kHalf);
}

std::vector<QuadratureNode> quadrature_nodes(const CuspParams& params, RegionLabel label,
                                             const Shell& shell, std::size_t count,
                                             std::uint64_t seed, SamplingMode mode) {
  if (!is_sampleable(label)) {
    throw ParameterError("region " + std::string(to_string(label)) + " is not sampleable");
  }
  double a = 0.0;
  double b = 0.0;
  if (!clipped_interval(shell, a, b)) {
    throw EmptyRegionError("shell k=" + std::to_string(shell.k()) + " does not meet region " +
                           std::string(to_string(label)));
  }
  if (count == 0) return {};

  const int n = params.dimension();
  const double s = params.degree();
  const double m = s * (n - 1);
  const double log_measure = std::log(slab_measure(params, label, a, b));
  // R1 splits the lower cusp into inner pieces; R2 keeps it whole.
  const Scheme scheme = label == RegionLabel::CuspInterior ? Scheme::R2 : scheme_of(label);
  const bool importance_e = mode == SamplingMode::Importance && label == RegionLabel::RegionE;
  const double e_cap = std::pow(kHalf, s);

  Rng rng(derive_seed(seed, {shell.k(), static_cast<std::int64_t>(label)}));

  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = count; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }

  const double dn = static_cast<double>(count);
  const double inv_cross = 1.0 / (n - 1);

  // Maps a stratified pair (u1, u2) to a profile point and its log weight.
  const auto map_node = [&](double u1, double u2, QuadratureNode& node) {
    double t = 0.0;
    double r = 0.0;
    double log_weight = log_measure;
    switch (label) {
      case RegionLabel::CuspInterior:
      case RegionLabel::InnerPiece1:
      case RegionLabel::InnerPiece2:
      case RegionLabel::InnerPiece3:
      case RegionLabel::RegionD: {
        const auto [lo, hi] = cusp_band(label);
        t = power_law_quantile(a, b, m, u1);
        const double lo_p = std::pow(lo, n - 1);
        const double hi_p = std::pow(hi, n - 1);
        r = std::pow(t, s) * std::pow(lo_p + u2 * (hi_p - lo_p), inv_cross);
        if (label == RegionLabel::RegionD) t = -t;
        break;
      }
      case RegionLabel::RegionA:
        t = power_law_quantile(a, b, n - 1, u1);
        r = t * std::pow(u2, inv_cross);
        t = -t;
        break;
      case RegionLabel::RegionB:
        r = power_law_quantile(a, b, n - 1, u1);
        t = r * (2.0 * u2 - 1.0);
        break;
      case RegionLabel::RegionC: {
        t = bisect_quantile(a, b, u1, [&](double x) {
          return std::pow(x, n) / n - std::pow(x, m + 1.0) / (m + 1.0);
        });
        const double lo_p = std::pow(t, m);
        const double hi_p = std::pow(t, n - 1);
        r = std::pow(lo_p + u2 * (hi_p - lo_p), inv_cross);
        break;
      }
      case RegionLabel::RegionE: {
        const bool negative = u1 < 0.5;
        const double u = negative ? 2.0 * u1 : 2.0 * u1 - 1.0;
        const double cap = std::pow(e_cap, n - 1);
        double at = 0.0;
        if (importance_e) {
          at = a + u * (b - a);
          const double r_lo = std::pow(at, s);
          const double span = std::log(e_cap / r_lo);
          r = r_lo * std::exp(u2 * span);
          log_weight = std::log(2.0 * (b - a)) + std::log(unit_sphere_area(n - 1)) +
                       (n - 1) * std::log(r) + std::log(span);
        } else {
          at = bisect_quantile(a, b, u, [&](double x) {
            return cap * x - std::pow(x, m + 1.0) / (m + 1.0);
          });
          const double lo_p = std::pow(at, m);
          r = std::pow(lo_p + u2 * (cap - lo_p), inv_cross);
        }
        t = negative ? -at : at;
        break;
      }
      default:
        break;
    }
    node.t = t;
    node.r = r;
    node.log_weight = log_weight;
  };

  std::vector<QuadratureNode> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    QuadratureNode& node = nodes[i];
    bool accepted = false;
    for (int attempt = 0; attempt < 32 && !accepted; ++attempt) {
      const double u1 = (static_cast<double>(i) + rng.uniform()) / dn;
      const double u2 = (static_cast<double>(perm[i]) + rng.uniform()) / dn;
      map_node(u1, u2, node);
      accepted = classify_profile(params, scheme, node.profile()) == label;
    }
    if (!accepted) {
      throw EmptyRegionError("could not place a sample inside region " +
                             std::string(to_string(label)) + " at shell k=" +
                             std::to_string(shell.k()));
    }
    node.direction = random_direction(rng, n - 1);
  }
  return nodes;
}

std::vector<Point> sample_region(const CuspParams& params, Scheme scheme, RegionLabel label,
                                 const Shell& shell, std::size_t count, std::uint64_t seed) {
  if (label != RegionLabel::CuspInterior && scheme_of(label) != scheme) {
    throw ParameterError("region " + std::string(to_string(label)) +
                         " does not belong to scheme " + std::string(to_string(scheme)));
  }
  const auto nodes = quadrature_nodes(params, label, shell, count, seed, SamplingMode::Uniform);
  std::vector<Point> points;
  points.reserve(nodes.size());
  for (const auto& node : nodes) points.push_back(node.point());
  return points;
}

}  // namespace cuspext
