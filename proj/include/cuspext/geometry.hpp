#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cuspext/errors.hpp"

namespace cuspext {

/// Dimension (>= 3) and cusp degree (> 1) of the outward cuspidal domain
///   {0 < t <= 1, |x| < t^s} U B((2,0), sqrt 2)  in R x R^{n-1}.
class CuspParams {
 public:
  CuspParams(int dimension, double degree);

  int dimension() const noexcept { return dimension_; }
  double degree() const noexcept { return degree_; }
  /// Number of cross-section coordinates, n - 1.
  int cross_dim() const noexcept { return dimension_ - 1; }

  /// Cusp radius t^s at height t > 0.
  double cusp_radius(double t) const;

  friend bool operator==(const CuspParams&, const CuspParams&) = default;

 private:
  int dimension_;
  double degree_;
};

/// A point (t, x) of R x R^{n-1}.
struct Point {
  double t = 0.0;
  Eigen::VectorXd x;

  Point() = default;
  Point(double t_, Eigen::VectorXd x_) : t(t_), x(std::move(x_)) {}
  /// From packed coordinates t, x_1, ..., x_{n-1}.
  static Point from_coords(std::span<const double> coords);
  /// (t, r e_1) in dimension n.
  static Point on_axis_plane(int dimension, double t, double r);

  int dimension() const noexcept { return static_cast<int>(x.size()) + 1; }
  double radius() const { return x.norm(); }
  double norm() const;
  std::vector<double> coords() const;
};

/// Axisymmetric reduction (t, |x|).
struct ProfilePoint {
  double t = 0.0;
  double r = 0.0;
};

enum class Scheme { R1, R2 };

enum class RegionLabel {
  CuspInterior,
  BallInterior,
  BoundaryCusp,
  RegionA,
  RegionB,
  RegionC,
  RegionD,
  RegionE,
  InnerPiece1,
  InnerPiece2,
  InnerPiece3,
  OutsideNeighborhood,
  Origin,
};

std::string_view to_string(RegionLabel label);
std::string_view to_string(Scheme scheme);
RegionLabel region_from_string(std::string_view name);

/// Dyadic shell [2^{-k-1}, 2^{-k}] in a region's scale variable.
class Shell {
 public:
  explicit Shell(int k);
  int k() const noexcept { return k_; }
  double lower() const;
  double upper() const;

 private:
  int k_;
};

/// Inclusive range of shell indices.
struct ShellRange {
  int k_min = 5;
  int k_max = 30;
  int count() const { return k_max - k_min + 1; }
};

/// Classification tolerance, relative to the natural scale of each interface.
inline constexpr double kClassifyTolerance = 1e-12;

RegionLabel classify(const CuspParams& params, Scheme scheme, const Point& z);
RegionLabel classify_profile(const CuspParams& params, Scheme scheme, ProfilePoint z);

/// True when `label` is an open region that samplers and shell measures support.
bool is_sampleable(RegionLabel label);
/// Scheme whose partition contains `label` (CuspInterior maps to R1).
Scheme scheme_of(RegionLabel label);
/// Scale variable of a region: |x| for region B, |t| otherwise.
double scale_variable(RegionLabel label, ProfilePoint z);

/// Exact volume of (region restricted to t < 1/2) intersected with the shell.
double shell_measure(const CuspParams& params, RegionLabel label, const Shell& shell);
/// Exact volume of the whole region restricted to t < 1/2.
double region_measure(const CuspParams& params, RegionLabel label);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);
/// Surface area of the unit sphere S^{d-1} in R^d.
double unit_sphere_area(int d);

/// How nodes are distributed inside a region-shell cell.
enum class SamplingMode {
  Uniform,     ///< uniform in volume; every weight equals the shell measure
  Importance,  ///< log-uniform in |x| on region E, uniform elsewhere
};

/// Stratified quadrature node; mean(f(node) * exp(log_weight)) estimates the shell integral.
struct QuadratureNode {
  double t = 0.0;
  double r = 0.0;
  double log_weight = 0.0;
  Eigen::VectorXd direction;  ///< unit vector in R^{n-1}

  ProfilePoint profile() const { return {t, r}; }
  Point point() const { return Point(t, r * direction); }
};

/// Latin-hypercube stratified nodes in region ∩ shell. Every node classifies to
/// `label`. Deterministic in (seed, shell.k, label).
/// Throws EmptyRegionError when the shell misses the region.
std::vector<QuadratureNode> quadrature_nodes(const CuspParams& params, RegionLabel label,
                                             const Shell& shell, std::size_t count,
                                             std::uint64_t seed,
                                             SamplingMode mode = SamplingMode::Uniform);

/// Uniform stratified points of region ∩ shell; see quadrature_nodes.
std::vector<Point> sample_region(const CuspParams& params, Scheme scheme, RegionLabel label,
                                 const Shell& shell, std::size_t count, std::uint64_t seed);

}  // namespace cuspext
