#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cuspext/extension.hpp"
#include "cuspext/geometry.hpp"
#include "cuspext/sobolev.hpp"

namespace cuspext {

/// Fixed 12-significant-digit formatting used by every CSV and CLI line.
std::string fmt(double v);

struct SweepConfig {
  int n = 3;
  double s = 2.0;
  std::vector<Scheme> schemes{Scheme::R1, Scheme::R2};
  std::vector<double> p_values;  ///< empty: 21 points on [1.1 p_min, 6]
  std::vector<double> q_values;  ///< empty: 21 points on [1, 5.95]
  /// Cells with q > p - q_gap are reported as window errors.
  double q_gap = 0.0;
  ShellRange shells;
  std::size_t samples = 4096;
  std::uint64_t seed = 42;

  /// The 21 x 21 grid: p on [1.1 p_min, 6], q on [1, 5.95], window gap 0.05.
  static SweepConfig grid(int n, double s);
};

inline constexpr const char* kSweepHeader =
    "n,s,scheme,region,p,q,q_max_theory,admissible_theory,e_predicted,k_min,k_max,partial_sum,"
    "last_ratio,verdict,agrees,seed";

struct SweepRow {
  int n = 0;
  double s = 0.0;
  Scheme scheme = Scheme::R1;
  std::string region;  ///< region name, or "all" for the scheme-level row
  double p = 0.0;
  double q = 0.0;
  double q_max_theory = 0.0;
  bool admissible_theory = false;
  double e_predicted = 0.0;
  int k_min = 0;
  int k_max = 0;
  double partial_sum = 0.0;
  double last_ratio = 0.0;
  std::string verdict;  ///< Convergent, Divergent, Inconclusive or WindowError
  std::string agrees;   ///< true, false, or na for Inconclusive and window rows
  std::uint64_t seed = 0;

  std::string csv() const;
};

/// Predicate q < q_max with a relative guard for cells exactly on the critical curve.
bool admissible(Scheme scheme, double p, double q, int n, double s);

std::vector<SweepRow> run_sweep(const SweepConfig& config);

/// Distance in q from (p, q) to the critical curve of `scheme`.
double critical_margin(Scheme scheme, double p, double q, int n, double s);

struct ScalingConfig {
  int n = 3;
  double s = 2.0;
  std::vector<RegionLabel> regions{RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC,
                                   RegionLabel::RegionD, RegionLabel::RegionE};
  ShellRange shells{5, 20};
};

inline constexpr const char* kScalingHeader = "region,scale,opnorm,abs_det,fitted_slope,target_slope";

struct ScalingRow {
  RegionLabel region;
  double scale = 0.0;
  double opnorm = 0.0;
  double abs_det = 0.0;
  double fitted_slope = 0.0;
  double target_slope = 0.0;

  std::string csv() const;
};

/// Point of `region` at relative position fixed across scales.
Point scaling_point(const CuspParams& params, RegionLabel region, double scale);
/// Fitted quantity of a region: |det| everywhere except E, where it is the operator norm.
double scaling_target(const CuspParams& params, RegionLabel region);

std::vector<ScalingRow> run_scaling(const ScalingConfig& config);

struct ExtendNormConfig {
  int n = 3;
  double s = 2.0;
  ExtensionSpec spec;
  std::string u = "power:1.4";
  double p = 2.0;
  double q = 1.1;
  ShellRange shells;
  std::size_t samples = 4096;
  std::uint64_t seed = 42;
};

inline constexpr const char* kExtendNormHeader = "shell,k,Lq_value_term,Lq_grad_term,partial,verdict";

struct ExtendNormResult {
  ExtensionNormReport report;
  std::vector<std::string> rows;
};

ExtendNormResult run_extendnorm(const ExtendNormConfig& config);

struct HolderConfig {
  int n = 3;
  double s = 2.0;
  std::vector<double> t_values;  ///< empty: 2^-3 .. 2^-10
};

inline constexpr const char* kHolderHeader = "t,osc,diam,fitted_exponent";

struct HolderResult {
  HolderProbe probe;
  std::vector<std::string> rows;
};

HolderResult run_holder(const HolderConfig& config);

/// Header line plus rows, newline-terminated.
std::string to_csv(const char* header, const std::vector<std::string>& rows);
std::string to_csv(const std::vector<SweepRow>& rows);
std::string to_csv(const std::vector<ScalingRow>& rows);

}  // namespace cuspext
