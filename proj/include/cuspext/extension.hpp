#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cuspext/geometry.hpp"
#include "cuspext/reflections.hpp"
#include "cuspext/sobolev.hpp"
#include "cuspext/test_function.hpp"

namespace cuspext {

enum class Direction {
  FromInside,   ///< extend from the cusp outward through the outer charts
  FromOutside,  ///< extend from the complement inward through the inner chart
};

struct ExtensionSpec {
  Scheme scheme = Scheme::R1;
  Direction direction = Direction::FromInside;

  /// Throws ParameterError for FromOutside with R2, which has no inner chart.
  void validate() const;
  /// Chart composed with u on the extension side.
  ChartId chart() const;
  /// Regions making up the extension side.
  std::vector<RegionLabel> extension_regions() const;
};

/// u on the native side, u∘R on the extension side, 0 on the cusp boundary.
/// Throws DomainError where neither applies.
double extend_eval(const ExtensionSpec& spec, const CuspParams& params, const TestFunction& u,
                   const Point& z);

/// Gradient of extend_eval; D(u∘R) = DR^T (Du)(R z) on the extension side.
Eigen::VectorXd extend_gradient(const ExtensionSpec& spec, const CuspParams& params,
                                const TestFunction& u, const Point& z);

/// Width of the collar over which the cutoff falls from 1 to 0.
inline constexpr double kCutoffWidth = 0.25;

/// Euclidean distance from a point of the neighbourhood to its complement, in profile coordinates.
double distance_to_complement(const CuspParams& params, ProfilePoint z);

/// 1 on the closed cusp domain, 0 off the neighbourhood, min(1, dist/width) in between.
double cutoff_psi(const CuspParams& params, const Point& z);

/// psi * E(u) for FromInside; the globally defined extension.
double extend_global(const ExtensionSpec& spec, const CuspParams& params, const TestFunction& u,
                     const Point& z);

/// True iff |t|^{-alpha} lies in W^{1,p} of the cusp below t = 1/2.
bool membership_oracle(double alpha, double p, int n, double s);
bool membership_oracle(const TestFunction& u, double p, int n, double s);

struct ExtensionNormReport {
  ShellSum value_term;  ///< per-shell integral of |u∘R|^q over the extension side
  ShellSum grad_term;   ///< per-shell integral of |D(u∘R)|^q
  ShellSum combined;    ///< value + grad per shell
  Verdict verdict;
  double lq_value = 0.0;     ///< (sum of value_term)^{1/q}
  double lq_grad = 0.0;      ///< (sum of grad_term)^{1/q}
  double source_norm = 0.0;  ///< W^{1,p} norm of u on the native side below t = 1/2
  double ratio = 0.0;        ///< (lq_value + lq_grad) / source_norm
};

ExtensionNormReport extension_norm_experiment(const ExtensionSpec& spec, const CuspParams& params,
                                              const TestFunction& u, double p, double q,
                                              ShellRange shells, std::size_t samples,
                                              std::uint64_t seed);

/// Largest |extend_gradient| over extension-side samples, per shell.
std::vector<double> gradient_shell_maxima(const ExtensionSpec& spec, const CuspParams& params,
                                          const TestFunction& u, ShellRange shells,
                                          std::size_t samples, std::uint64_t seed);

struct HolderRow {
  double t = 0.0;
  double osc = 0.0;
  double diam = 0.0;
};

struct HolderProbe {
  std::vector<HolderRow> rows;
  ScalingFit fit;  ///< log osc against log diam
};

inline constexpr int kHolderRadii = 64;

/// Oscillation of the inward extension of clamp(t, 0, 1) across the cusp cross-section at
/// each t in (0, 1/2), and the fitted power osc ~ diam^beta.
HolderProbe holder_probe(const CuspParams& params, const std::vector<double>& t_values);

}  // namespace cuspext
