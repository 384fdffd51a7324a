#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "cuspext/geometry.hpp"

namespace cuspext {

enum class ChartId { R1Outer, R1Inner, R2Outer };

std::string_view to_string(ChartId chart);
/// Accepts "r1-outer", "r1-inner", "r2-outer".
ChartId chart_from_string(std::string_view name);
Scheme chart_scheme(ChartId chart);

/// Profile map (t, r) -> (T, R) of one piece together with its partial derivatives.
/// R_over_r is R/r, kept separately so the axis r = 0 needs no division.
struct ProfileJet {
  double T = 0.0;
  double R = 0.0;
  double T_t = 0.0;
  double T_r = 0.0;
  double R_t = 0.0;
  double R_r = 0.0;
  double R_over_r = 0.0;

  double det2() const { return T_t * R_r - T_r * R_t; }
  /// Largest singular value of the meridional 2x2 block.
  double sigma_max() const;
  /// Spectral norm of the full n x n differential.
  double opnorm() const;
  double det(int n) const;
  double log_abs_det(int n) const;
};

/// Image point, differential (rows = image coordinates), determinant and spectral norm.
struct Jet {
  Point image;
  Eigen::MatrixXd differential;
  double det = 0.0;
  double opnorm = 0.0;
  RegionLabel piece = RegionLabel::Origin;
};

/// Minimum relative distance to a piece interface for `differential`.
inline constexpr double kInterfaceGap = 2e-6;

/// Piece of `chart` containing z; BoundaryCusp on the fixed boundary.
/// Throws DomainError carrying the classify label when z is outside the chart domain.
RegionLabel chart_piece(ChartId chart, const CuspParams& params, ProfilePoint z);

/// Closed-form profile jet of a single piece (A..E, InnerPiece1..3). No domain check.
ProfileJet piece_jet(const CuspParams& params, RegionLabel piece, ProfilePoint z);

/// Distance from z to the nearest interface of `piece`, relative to the local piece scale.
double interface_gap(const CuspParams& params, RegionLabel piece, ProfilePoint z);

ProfilePoint apply_profile(ChartId chart, const CuspParams& params, ProfilePoint z);
Point apply(ChartId chart, const CuspParams& params, const Point& z);

/// Assembles the n x n differential from a profile jet at a point with cross-section x.
Eigen::MatrixXd assemble_differential(const ProfileJet& jet, const Eigen::VectorXd& x);

/// Analytic differential. Throws PreconditionError within kInterfaceGap of an interface.
Jet differential(ChartId chart, const CuspParams& params, const Point& z);

/// Default finite-difference step max(1e-6, 1e-6 |z|).
double fd_step(const Point& z);
/// Central differences of apply. Throws PreconditionError unless the 2h ball stays in one piece.
Eigen::MatrixXd differential_fd(ChartId chart, const CuspParams& params, const Point& z, double h);

/// Per-piece closed-form inverse. Throws DomainError outside the chart image.
ProfilePoint invert_profile(ChartId chart, const CuspParams& params, ProfilePoint w);
Point invert(ChartId chart, const CuspParams& params, const Point& w);

/// opnorm^p / |det|.
double distortion(ChartId chart, const CuspParams& params, const Point& z, double p);

}  // namespace cuspext
