#include "cuspext/reflections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cuspext {

namespace {

constexpr double kHalf = 0.5;

[[noreturn]] void outside_domain(ChartId chart, RegionLabel label) {
  throw DomainError("point in " + std::string(to_string(label)) + " is outside the domain of " +
                        std::string(to_string(chart)),
                    label);
}

[[noreturn]] void outside_image(ChartId chart, RegionLabel label) {
  throw DomainError("point in " + std::string(to_string(label)) + " is outside the image of " +
                        std::string(to_string(chart)),
                    label);
}

bool is_inner(RegionLabel label) {
  return label == RegionLabel::InnerPiece1 || label == RegionLabel::InnerPiece2 ||
         label == RegionLabel::InnerPiece3;
}

// Inner chart pieces on 0 < t <= 1/2, strictly inside the cusp.
RegionLabel inner_piece(const CuspParams& params, ProfilePoint z, RegionLabel fallback) {
  if (!(z.t > 0.0 && z.t <= kHalf)) return fallback;
  const double rb = params.cusp_radius(z.t);
  const double tau = kClassifyTolerance;
  if (z.r >= rb * (1.0 - tau)) return fallback;
  if (z.r <= rb / 6.0 * (1.0 + tau)) return RegionLabel::InnerPiece1;
  if (z.r <= rb / 3.0 * (1.0 + tau)) return RegionLabel::InnerPiece2;
  return RegionLabel::InnerPiece3;
}

struct Constraint {
  double value;  // signed distance-like quantity, positive inside
  double scale;  // relative reference
  double slope;  // gradient norm, for first-order absolute distance
};

// Interfaces bounding each piece in profile coordinates.
std::vector<Constraint> piece_constraints(const CuspParams& params, RegionLabel piece,
                                          ProfilePoint z) {
  const double s = params.degree();
  const double at = std::abs(z.t);
  const double ats = std::pow(at, s);
  const double root2 = std::sqrt(2.0);
  const auto curve_slope = [&](double c) {
    const double d = c * s * std::pow(at, s - 1.0);
    return std::sqrt(1.0 + d * d);
  };
  switch (piece) {
    case RegionLabel::RegionA:
      return {{at - z.r, at, root2}};
    case RegionLabel::RegionB:
      return {{z.r - at, z.r, root2}};
    case RegionLabel::RegionC: {
      const double width = z.t - ats;
      return {{z.t - z.r, width, root2}, {z.r - ats, width, curve_slope(1.0)}};
    }
    case RegionLabel::RegionD:
      return {{ats - z.r, ats, curve_slope(1.0)}};
    case RegionLabel::RegionE:
      return {{z.r - ats, z.r, curve_slope(1.0)}};
    case RegionLabel::InnerPiece1:
      return {{ats / 6.0 - z.r, ats, curve_slope(1.0 / 6.0)}};
    case RegionLabel::InnerPiece2:
      return {{z.r - ats / 6.0, ats, curve_slope(1.0 / 6.0)},
              {ats / 3.0 - z.r, ats, curve_slope(1.0 / 3.0)}};
    case RegionLabel::InnerPiece3:
      return {{z.r - ats / 3.0, ats, curve_slope(1.0 / 3.0)}, {ats - z.r, ats, curve_slope(1.0)}};
    default:
      throw PreconditionError("no differential on " + std::string(to_string(piece)));
  }
}

double interface_distance(const CuspParams& params, RegionLabel piece, ProfilePoint z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : piece_constraints(params, piece, z)) best = std::min(best, c.value / c.slope);
  return best;
}

Point image_of(const ProfileJet& jet, const Point& z) { return Point(jet.T, jet.R_over_r * z.x); }

Eigen::VectorXd axis_direction(const Eigen::VectorXd& x) {
  const double r = x.norm();
  if (r > 0.0) return x / r;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
  e[0] = 1.0;
  return e;
}

}  // namespace

double ProfileJet::sigma_max() const {
  const double a = T_t;
  const double b = T_r;
  const double c = R_t;
  const double d = R_r;
  return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, c + b));
}

double ProfileJet::opnorm() const { return std::max(sigma_max(), std::abs(R_over_r)); }

double ProfileJet::det(int n) const { return det2() * std::pow(R_over_r, n - 2); }

double ProfileJet::log_abs_det(int n) const {
  return std::log(std::abs(det2())) + (n - 2) * std::log(std::abs(R_over_r));
}

std::string_view to_string(ChartId chart) {
  switch (chart) {
    case ChartId::R1Outer: return "r1-outer";
    case ChartId::R1Inner: return "r1-inner";
    case ChartId::R2Outer: return "r2-outer";
  }
  return "?";
}

ChartId chart_from_string(std::string_view name) {
  for (ChartId c : {ChartId::R1Outer, ChartId::R1Inner, ChartId::R2Outer}) {
    if (name == to_string(c)) return c;
  }
  throw ParameterError("unknown chart '" + std::string(name) + "'");
}

Scheme chart_scheme(ChartId chart) { return chart == ChartId::R2Outer ? Scheme::R2 : Scheme::R1; }

RegionLabel chart_piece(ChartId chart, const CuspParams& params, ProfilePoint z) {
  const RegionLabel label = classify_profile(params, chart_scheme(chart), z);
  if (label == RegionLabel::BoundaryCusp) return label;
  switch (chart) {
    case ChartId::R1Outer:
      if (label == RegionLabel::RegionA || label == RegionLabel::RegionB ||
          label == RegionLabel::RegionC) {
        return label;
      }
      break;
    case ChartId::R2Outer:
      if (label == RegionLabel::RegionD || label == RegionLabel::RegionE) return label;
      break;
    case ChartId::R1Inner: {
      if (is_inner(label)) return label;
      const RegionLabel piece = inner_piece(params, z, label);
      if (is_inner(piece)) return piece;
      break;
    }
  }
  outside_domain(chart, label);
}

ProfileJet piece_jet(const CuspParams& params, RegionLabel piece, ProfilePoint z) {
  const double s = params.degree();
  const double t = z.t;
  const double r = z.r;
  ProfileJet j;
  switch (piece) {
    case RegionLabel::RegionA: {
      const double at = -t;
      const double c = std::pow(at, s - 1.0) / 6.0;
      j.T = at;
      j.R = c * r;
      j.T_t = -1.0;
      j.R_t = -(s - 1.0) * std::pow(at, s - 2.0) * r / 6.0;
      j.R_r = c;
      j.R_over_r = c;
      break;
    }
    case RegionLabel::RegionB: {
      const double lin = t / 6.0 + r / 3.0;
      j.T = r;
      j.R = std::pow(r, s - 1.0) * lin;
      j.T_r = 1.0;
      j.R_t = std::pow(r, s - 1.0) / 6.0;
      j.R_r = (s - 1.0) * std::pow(r, s - 2.0) * lin + std::pow(r, s - 1.0) / 3.0;
      j.R_over_r = std::pow(r, s - 2.0) * lin;
      break;
    }
    case RegionLabel::RegionC: {
      const double u = std::pow(t, s - 1.0);
      const double du = (s - 1.0) * std::pow(t, s - 2.0);
      const double a = u / (2.0 * (u - 1.0));
      const double da = -du / (2.0 * (u - 1.0) * (u - 1.0));
      const double ts = t * u;
      const double b = ts * (1.0 - a);
      const double db = s * u * (1.0 - a) - ts * da;
      j.T = t;
      j.R = a * r + b;
      j.T_t = 1.0;
      j.R_t = da * r + db;
      j.R_r = a;
      j.R_over_r = a + b / r;
      break;
    }
    case RegionLabel::RegionD:
      j.T = -t;
      j.R = 0.5 * r;
      j.T_t = -1.0;
      j.R_r = 0.5;
      j.R_over_r = 0.5;
      break;
    case RegionLabel::RegionE: {
      const double q = std::pow(r, -1.0 / s);  // r^{-1/s}
      j.T = std::pow(r, 1.0 / s);
      j.R = 0.25 * t * r * q + 0.75 * r;
      j.T_r = j.T / (s * r);
      j.R_t = 0.25 * r * q;
      j.R_r = 0.25 * t * (1.0 - 1.0 / s) * q + 0.75;
      j.R_over_r = 0.25 * t * q + 0.75;
      break;
    }
    case RegionLabel::InnerPiece1: {
      const double c = 6.0 * std::pow(t, 1.0 - s);
      j.T = -t;
      j.R = c * r;
      j.T_t = -1.0;
      j.R_t = -6.0 * (s - 1.0) * r * std::pow(t, -s);
      j.R_r = c;
      j.R_over_r = c;
      break;
    }
    case RegionLabel::InnerPiece2: {
      const double c = 12.0 * std::pow(t, 1.0 - s);
      j.T = c * r - 3.0 * t;
      j.R = t;
      j.T_t = 12.0 * (1.0 - s) * r * std::pow(t, -s) - 3.0;
      j.T_r = c;
      j.R_t = 1.0;
      j.R_over_r = t / r;
      break;
    }
    case RegionLabel::InnerPiece3: {
      const double alpha = 1.5 - 1.5 * std::pow(t, 1.0 - s);
      const double beta = 1.5 * t - 0.5 * std::pow(t, s);
      j.T = t;
      j.R = alpha * r + beta;
      j.T_t = 1.0;
      j.R_t = 1.5 * (s - 1.0) * std::pow(t, -s) * r + 1.5 - 0.5 * s * std::pow(t, s - 1.0);
      j.R_r = alpha;
      j.R_over_r = alpha + beta / r;
      break;
    }
    default:
      throw ParameterError("no chart piece for " + std::string(to_string(piece)));
  }
  return j;
}

double interface_gap(const CuspParams& params, RegionLabel piece, ProfilePoint z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : piece_constraints(params, piece, z)) best = std::min(best, c.value / c.scale);
  return best;
}

ProfilePoint apply_profile(ChartId chart, const CuspParams& params, ProfilePoint z) {
  const RegionLabel piece = chart_piece(chart, params, z);
  if (piece == RegionLabel::BoundaryCusp) return z;
  const ProfileJet j = piece_jet(params, piece, z);
  return {j.T, j.R};
}

Point apply(ChartId chart, const CuspParams& params, const Point& z) {
  if (z.dimension() != params.dimension()) throw ParameterError("point dimension does not match n");
  if (!std::isfinite(z.t) || !z.x.allFinite()) throw ParameterError("non-finite coordinate");
  const ProfilePoint pz{z.t, z.radius()};
  const RegionLabel piece = chart_piece(chart, params, pz);
  if (piece == RegionLabel::BoundaryCusp) return z;
  return image_of(piece_jet(params, piece, pz), z);
}

Eigen::MatrixXd assemble_differential(const ProfileJet& jet, const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  const Eigen::VectorXd u = axis_direction(x);
  Eigen::MatrixXd d(m + 1, m + 1);
  d(0, 0) = jet.T_t;
  d.block(0, 1, 1, m) = jet.T_r * u.transpose();
  d.block(1, 0, m, 1) = jet.R_t * u;
  const Eigen::MatrixXd uu = u * u.transpose();
  d.block(1, 1, m, m) =
      jet.R_r * uu + jet.R_over_r * (Eigen::MatrixXd::Identity(m, m) - uu);
  return d;
}

Jet differential(ChartId chart, const CuspParams& params, const Point& z) {
  if (z.dimension() != params.dimension()) throw ParameterError("point dimension does not match n");
  const ProfilePoint pz{z.t, z.radius()};
  const RegionLabel piece = chart_piece(chart, params, pz);
  if (piece == RegionLabel::BoundaryCusp) {
    throw PreconditionError("no differential on the boundary of the cusp");
  }
  if (interface_gap(params, piece, pz) <= kInterfaceGap) {
    throw PreconditionError("point too close to an interface of " +
                            std::string(to_string(piece)));
  }
  const ProfileJet pj = piece_jet(params, piece, pz);
  Jet jet;
  jet.image = image_of(pj, z);
  jet.differential = assemble_differential(pj, z.x);
  jet.det = pj.det(params.dimension());
  jet.opnorm = pj.opnorm();
  jet.piece = piece;
  return jet;
}

double fd_step(const Point& z) { return std::max(1e-6, 1e-6 * z.norm()); }

Eigen::MatrixXd differential_fd(ChartId chart, const CuspParams& params, const Point& z, double h) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  const ProfilePoint pz{z.t, z.radius()};
  const RegionLabel piece = chart_piece(chart, params, pz);
  if (piece == RegionLabel::BoundaryCusp) {
    throw PreconditionError("no differential on the boundary of the cusp");
  }
  if (interface_distance(params, piece, pz) <= 2.0 * h) {
    throw PreconditionError("finite-difference stencil crosses an interface of " +
                            std::string(to_string(piece)));
  }
  const int n = params.dimension();
  const auto map = [&](const Point& w) {
    return image_of(piece_jet(params, piece, {w.t, w.radius()}), w);
  };
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    Point plus = z;
    Point minus = z;
    if (j == 0) {
      plus.t += h;
      minus.t -= h;
    } else {
      plus.x[j - 1] += h;
      minus.x[j - 1] -= h;
    }
    const Point fp = map(plus);
    const Point fm = map(minus);
    d(0, j) = (fp.t - fm.t) / (2.0 * h);
    d.block(1, j, n - 1, 1) = (fp.x - fm.x) / (2.0 * h);
  }
  return d;
}

ProfilePoint invert_profile(ChartId chart, const CuspParams& params, ProfilePoint w) {
  const double s = params.degree();
  const double tau = kClassifyTolerance;
  const RegionLabel label = classify_profile(params, chart_scheme(chart), w);
  if (label == RegionLabel::BoundaryCusp) return w;

  if (chart == ChartId::R1Inner) {
    const double tp = w.t;
    const double rp = w.r;
    switch (label) {
      case RegionLabel::RegionA: {
        const double t = -tp;
        return {t, rp * std::pow(t, s - 1.0) / 6.0};
      }
      case RegionLabel::RegionB: {
        const double t = rp;
        return {t, (tp + 3.0 * t) * std::pow(t, s - 1.0) / 12.0};
      }
      case RegionLabel::RegionC: {
        const double t = tp;
        const double alpha = 1.5 - 1.5 * std::pow(t, 1.0 - s);
        const double beta = 1.5 * t - 0.5 * std::pow(t, s);
        return {t, (rp - beta) / alpha};
      }
      default:
        outside_image(chart, label);
    }
  }

  // Outer charts: the image is the cusp part below t = 1/2, split into radial bands.
  const double tp = w.t;
  const double rp = w.r;
  if (!(tp > 0.0 && tp < kHalf)) outside_image(chart, label);
  const double rb = std::pow(tp, s);
  if (!(rp < rb)) outside_image(chart, label);

  if (chart == ChartId::R2Outer) {
    if (rp <= 0.5 * rb * (1.0 + tau)) return {-tp, 2.0 * rp};
    return {(4.0 * rp - 3.0 * rb) / std::pow(tp, s - 1.0), rb};
  }
  if (rp <= rb / 6.0 * (1.0 + tau)) {
    return {-tp, 6.0 * rp / std::pow(tp, s - 1.0)};
  }
  if (rp <= 0.5 * rb * (1.0 + tau)) {
    return {6.0 * rp / std::pow(tp, s - 1.0) - 2.0 * tp, tp};
  }
  const double u = std::pow(tp, s - 1.0);
  const double a = u / (2.0 * (u - 1.0));
  const double b = rb * (1.0 - a);
  return {tp, (rp - b) / a};
}

Point invert(ChartId chart, const CuspParams& params, const Point& w) {
  if (w.dimension() != params.dimension()) throw ParameterError("point dimension does not match n");
  if (!std::isfinite(w.t) || !w.x.allFinite()) throw ParameterError("non-finite coordinate");
  const double rp = w.radius();
  const ProfilePoint pre = invert_profile(chart, params, {w.t, rp});
  if (pre.t == w.t && pre.r == rp) return w;
  const Eigen::VectorXd u = axis_direction(w.x);
  return Point(pre.t, pre.r * u);
}

double distortion(ChartId chart, const CuspParams& params, const Point& z, double p) {
  if (!(p >= 1.0)) throw WindowError("distortion needs p >= 1");
  const Jet jet = differential(chart, params, z);
  if (!(std::abs(jet.det) >= 1e-300)) {
    throw SingularityError("Jacobian determinant vanishes");
  }
  return std::pow(jet.opnorm, p) / std::abs(jet.det);
}

}  // namespace cuspext
