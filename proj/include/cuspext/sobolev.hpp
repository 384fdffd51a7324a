#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "cuspext/geometry.hpp"
#include "cuspext/reflections.hpp"
#include "cuspext/test_function.hpp"

namespace cuspext {

struct ExponentPair {
  double p = 0.0;
  double q = 0.0;
};

double p_min_r1(int n, double s);
/// n p / (1 + (n-1)s); throws WindowError for p <= p_min_r1.
double q_max_r1(double p, int n, double s);
double p_min_r2(int n, double s);
/// (1+(n-1)s) p / (1+(n-1)s+(s-1)p); throws WindowError for p <= p_min_r2.
double q_max_r2(double p, int n, double s);
double p_min(Scheme scheme, int n, double s);
double q_max(Scheme scheme, double p, int n, double s);
/// (n-1)(1+(n-1)s)/n, where both critical curves pass through q = n - 1.
double p_star(int n, double s);
/// p / (p + 1 - n); throws WindowError for p <= n - 1.
double dual_exponent(double p, int n);

/// Power e with shell-k contribution ~ 2^{-k(e+1)} for the distortion integral on `region`.
/// Throws WindowError unless 1 <= q < p.
double predicted_shell_exponent(RegionLabel region, double p, double q, int n, double s);
/// Expected ratio of consecutive shell contributions, 2^{-(e+1)}.
double predicted_shell_ratio(double e);

/// Chart whose domain contains `region`.
ChartId chart_for_region(RegionLabel region);

/// Dyadic decomposition of a singular integral.
struct ShellSum {
  ShellRange shells;
  std::vector<double> log_contributions;  ///< -inf for a zero contribution
  std::vector<double> contributions;
  std::vector<double> partial_sums;
  std::vector<double> ratios;  ///< ratios[i] = c_i / c_{i-1}, ratios[0] = NaN; 0/0 := 0

  static ShellSum from_logs(ShellRange shells, std::vector<double> log_contributions);
  double total() const { return partial_sums.empty() ? 0.0 : partial_sums.back(); }
  double last_ratio() const { return ratios.empty() ? 0.0 : ratios.back(); }
};

enum class VerdictKind { Convergent, Divergent, Inconclusive };
std::string_view to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  double ratio = 0.0;  ///< geometric mean of the last window of ratios
};

inline constexpr int kVerdictWindow = 4;
inline constexpr double kRatioConvergent = 0.9;
inline constexpr double kRatioDivergent = 1.0;
inline constexpr double kPartialSumCap = 1e12;

/// Throws ParameterError for fewer than 6 shells.
Verdict convergence_verdict(const ShellSum& sum);

/// log of the integrand at a node; may throw PreconditionError to request a replacement node.
using LogIntegrand = std::function<double(const QuadratureNode&)>;

/// Stratified estimate of the integral of exp(log_f) over region ∩ shell, per shell.
/// Shells that miss the region contribute zero. Shells run in parallel; results do not
/// depend on scheduling.
ShellSum shell_integral(const CuspParams& params, RegionLabel region, ShellRange shells,
                        std::size_t samples, std::uint64_t seed, SamplingMode mode,
                        const LogIntegrand& log_f);

/// Per-node log opnorm and log |det| of the chart on one region, reusable across (p, q).
class DistortionField {
 public:
  DistortionField(const CuspParams& params, ChartId chart, RegionLabel region, ShellRange shells,
                  std::size_t samples, std::uint64_t seed,
                  SamplingMode mode = SamplingMode::Importance);

  /// Integral of opnorm^{pq/(p-q)} / |det|^{q/(p-q)}; throws WindowError unless 1 <= q < p.
  ShellSum integrate(double p, double q) const;
  /// Largest and smallest sampled value of exp(a log opnorm + b log r) per shell.
  std::vector<std::pair<double, double>> shell_extrema(double a, double b) const;

  RegionLabel region() const noexcept { return region_; }
  ShellRange shells() const noexcept { return shells_; }

 private:
  struct Sample {
    double log_opnorm;
    double log_abs_det;
    double log_weight;
    double log_r;
    double log_t;
  };
  RegionLabel region_;
  ShellRange shells_;
  std::vector<std::vector<Sample>> cells_;
};

ShellSum distortion_integral(const CuspParams& params, ChartId chart, RegionLabel region, double p,
                             double q, ShellRange shells, std::size_t samples, std::uint64_t seed);

/// Integral of |Du|^p over region ∩ {t < 1/2}, per shell.
ShellSum sobolev_seminorm(const CuspParams& params, const TestFunction& u, RegionLabel region,
                          double p, ShellRange shells, std::size_t samples, std::uint64_t seed);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root mean square of the log residuals
};

/// Least squares on (log scale, log value). Needs >= 3 pairs with positive entries.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& pairs);

/// Runs body(i) for i in [0, count) on the available hardware threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace cuspext
