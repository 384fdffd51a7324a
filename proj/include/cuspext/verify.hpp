#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cuspext/geometry.hpp"

namespace cuspext {

/// One row of the invariant report.
struct CheckResult {
  std::string name;
  std::size_t samples = 0;
  double worst_error = 0.0;
  double threshold = 0.0;
  bool pass = false;

  std::string csv() const;
};

struct VerifyOptions {
  int n = 3;
  double s = 2.0;
  std::uint64_t seed = 42;
  /// Test hook: flips the sign of one analytic differential entry before comparison.
  bool fault_negate_entry = false;
  std::size_t sweep_samples = 1024;
};

inline constexpr const char* kVerifyHeader = "name,samples,worst_error,threshold,pass";

// geometry
CheckResult check_partition(const CuspParams& params, Scheme scheme, std::size_t count,
                            std::uint64_t seed);
CheckResult check_boundary_classification(const CuspParams& params, std::size_t count,
                                          std::uint64_t seed);
CheckResult check_shell_measure_sums(const CuspParams& params);
CheckResult check_sampler_hits(const CuspParams& params, std::uint64_t seed);

// reflections
CheckResult check_boundary_fixity(const CuspParams& params, std::size_t count, std::uint64_t seed);
CheckResult check_interface_continuity(const CuspParams& params, std::size_t pairs,
                                       std::uint64_t seed);
CheckResult check_image_bands(const CuspParams& params, std::uint64_t seed);
CheckResult check_equivariance(const CuspParams& params, std::size_t count, std::uint64_t seed);
CheckResult check_det_recompute(const CuspParams& params, std::size_t per_piece, std::uint64_t seed);
/// Slope of |det| against the scale variable; sampled on A, fixed relative position elsewhere.
CheckResult check_jacobian_scaling(const CuspParams& params, RegionLabel region, std::uint64_t seed);
CheckResult check_opnorm_boundedness(const CuspParams& params, std::uint64_t seed);
/// max/min of opnorm |x|^{(s-1)/s} over region E samples, shells 5..20.
CheckResult check_e_distortion_band(const CuspParams& params, std::uint64_t seed);
CheckResult check_fd_agreement(const CuspParams& params, std::size_t per_piece, std::uint64_t seed,
                               bool fault = false);
CheckResult check_round_trip(const CuspParams& params, std::size_t per_piece, std::uint64_t seed);

// sobolev
CheckResult check_window_consistency(const CuspParams& params, Scheme scheme, std::size_t samples,
                                     std::uint64_t seed);
CheckResult check_shell_exponents(const CuspParams& params, std::size_t pairs, std::size_t samples,
                                  std::uint64_t seed);
CheckResult check_exponent_curves(const CuspParams& params);
/// Involution for n = 2, closed-form double dual and fixed point p = n otherwise.
CheckResult check_dual_exponent(int n, std::uint64_t seed);

// extension
CheckResult check_native_identity(const CuspParams& params, std::uint64_t seed);
CheckResult check_trace_matching(const CuspParams& params, std::uint64_t seed);
CheckResult check_cutoff_product(const CuspParams& params, std::uint64_t seed);
CheckResult check_test_function_gradients(const CuspParams& params, std::uint64_t seed);
CheckResult check_extension_gradient_fd(const CuspParams& params, std::uint64_t seed);
CheckResult check_w1inf_positive(const CuspParams& params, std::uint64_t seed);
CheckResult check_holder_negative(const CuspParams& params);

std::vector<CheckResult> run_verify(const VerifyOptions& options);
std::string verify_csv(const std::vector<CheckResult>& results);

}  // namespace cuspext
