#include "cuspext/sobolev.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "cuspext/random.hpp"

namespace cuspext {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kNodeRetries = 16;

void check_params(int n, double s) { CuspParams(n, s); }

void check_pair(double p, double q) {
  if (!(q >= 1.0 && q < p && std::isfinite(p))) {
    throw WindowError("exponent pair needs 1 <= q < p, got p=" + std::to_string(p) +
                      " q=" + std::to_string(q));
  }
}

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

// Quadrature nodes of one shell, with rejected nodes replaced by fresh single draws.
std::vector<QuadratureNode> accepted_nodes(const CuspParams& params, RegionLabel region,
                                           const Shell& shell, std::size_t samples,
                                           std::uint64_t seed, SamplingMode mode,
                                           const std::function<bool(const QuadratureNode&)>& ok) {
  auto nodes = quadrature_nodes(params, region, shell, samples, seed, mode);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int attempt = 0;
    while (!ok(nodes[i])) {
      if (++attempt > kNodeRetries) {
        throw PreconditionError("no admissible replacement node in " +
                                std::string(to_string(region)));
      }
      const std::uint64_t sub = derive_seed(seed, {shell.k(), static_cast<std::int64_t>(i), attempt});
      nodes[i] = quadrature_nodes(params, region, shell, 1, sub, mode).front();
    }
  }
  return nodes;
}

}  // namespace

double p_min_r1(int n, double s) {
  check_params(n, s);
  return (1.0 + (n - 1) * s) / n;
}

double q_max_r1(double p, int n, double s) {
  if (!(p > p_min_r1(n, s))) throw WindowError("p must exceed (1+(n-1)s)/n for the first reflection");
  return n * p / (1.0 + (n - 1) * s);
}

double p_min_r2(int n, double s) {
  check_params(n, s);
  return (1.0 + (n - 1) * s) / (2.0 + (n - 2) * s);
}

double q_max_r2(double p, int n, double s) {
  if (!(p > p_min_r2(n, s))) {
    throw WindowError("p must exceed (1+(n-1)s)/(2+(n-2)s) for the second reflection");
  }
  const double k = 1.0 + (n - 1) * s;
  return k * p / (k + (s - 1.0) * p);
}

double p_min(Scheme scheme, int n, double s) {
  return scheme == Scheme::R1 ? p_min_r1(n, s) : p_min_r2(n, s);
}

double q_max(Scheme scheme, double p, int n, double s) {
  return scheme == Scheme::R1 ? q_max_r1(p, n, s) : q_max_r2(p, n, s);
}

double p_star(int n, double s) {
  check_params(n, s);
  return (n - 1) * (1.0 + (n - 1) * s) / n;
}

double dual_exponent(double p, int n) {
  if (!(p > n - 1)) throw WindowError("dual exponent needs p > n - 1");
  return p / (p + 1.0 - n);
}

double predicted_shell_exponent(RegionLabel region, double p, double q, int n, double s) {
  check_params(n, s);
  check_pair(p, q);
  const double b = q / (p - q);
  switch (region) {
    case RegionLabel::RegionA:
    case RegionLabel::RegionB:
    case RegionLabel::RegionC:
      return (n - 1) - (n - 1) * (s - 1.0) * b;
    case RegionLabel::RegionD:
      return (n - 1) * s;
    case RegionLabel::RegionE:
      // Once the |x| integral converges on its own the shell scales with its width.
      return std::min((n - 1) * s - (s - 1.0) * p * b, 0.0);
    case RegionLabel::InnerPiece1:
    case RegionLabel::InnerPiece2:
      return (n - 1) * s + (s - 1.0) * b * ((n - 1) - p);
    case RegionLabel::InnerPiece3:
      // |J| drops to |R_r| in a layer of relative width t^{s-1} along the boundary.
      return (n - 1) * s - (s - 1.0) * b * (p - 1.0) + (s - 1.0) * std::min((n - 2) * b, 1.0);
    default:
      throw ParameterError("no distortion exponent for " + std::string(to_string(region)));
  }
}

double predicted_shell_ratio(double e) { return std::exp2(-(e + 1.0)); }

ChartId chart_for_region(RegionLabel region) {
  switch (region) {
    case RegionLabel::RegionA:
    case RegionLabel::RegionB:
    case RegionLabel::RegionC:
      return ChartId::R1Outer;
    case RegionLabel::RegionD:
    case RegionLabel::RegionE:
      return ChartId::R2Outer;
    case RegionLabel::InnerPiece1:
    case RegionLabel::InnerPiece2:
    case RegionLabel::InnerPiece3:
      return ChartId::R1Inner;
    default:
      throw ParameterError("no chart covers " + std::string(to_string(region)));
  }
}

ShellSum ShellSum::from_logs(ShellRange shells, std::vector<double> log_contributions) {
  ShellSum out;
  out.shells = shells;
  out.log_contributions = std::move(log_contributions);
  const std::size_t m = out.log_contributions.size();
  out.contributions.resize(m);
  out.partial_sums.resize(m);
  out.ratios.resize(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lc = out.log_contributions[i];
    out.contributions[i] = std::exp(lc);
    acc += out.contributions[i];
    out.partial_sums[i] = acc;
    if (i == 0) {
      out.ratios[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double prev = out.log_contributions[i - 1];
      out.ratios[i] = (lc == kNegInf) ? 0.0 : (prev == kNegInf ? std::numeric_limits<double>::infinity()
                                                                : std::exp(lc - prev));
    }
  }
  return out;
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Convergent: return "Convergent";
    case VerdictKind::Divergent: return "Divergent";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Verdict convergence_verdict(const ShellSum& sum) {
  const std::size_t m = sum.ratios.size();
  if (m < 6) throw ParameterError("a verdict needs at least 6 shells");
  Verdict v;
  bool all_conv = true;
  bool all_div = true;
  double log_mean = 0.0;
  for (std::size_t i = m - kVerdictWindow; i < m; ++i) {
    const double r = sum.ratios[i];
    all_conv = all_conv && r <= kRatioConvergent;
    all_div = all_div && r >= kRatioDivergent;
    log_mean += std::log(r);
  }
  v.ratio = std::exp(log_mean / kVerdictWindow);
  if (all_conv) {
    v.kind = VerdictKind::Convergent;
  } else if (all_div || sum.total() > kPartialSumCap) {
    v.kind = VerdictKind::Divergent;
  } else {
    v.kind = VerdictKind::Inconclusive;
  }
  return v;
}

ShellSum shell_integral(const CuspParams& params, RegionLabel region, ShellRange shells,
                        std::size_t samples, std::uint64_t seed, SamplingMode mode,
                        const LogIntegrand& log_f) {
  if (shells.count() < 1) throw ParameterError("empty shell range");
  if (samples == 0) throw ParameterError("samples per shell must be positive");
  std::vector<double> logs(static_cast<std::size_t>(shells.count()), kNegInf);
  parallel_for(logs.size(), [&](std::size_t i) {
    const Shell shell(shells.k_min + static_cast<int>(i));
    if (shell_measure(params, region, shell) <= 0.0) return;
    std::vector<double> values;
    values.reserve(samples);
    const auto ok = [&](const QuadratureNode& node) {
      try {
        values.push_back(log_f(node) + node.log_weight);
        return true;
      } catch (const PreconditionError&) {
        return false;
      }
    };
    accepted_nodes(params, region, shell, samples, seed, mode, ok);
    logs[i] = log_sum_exp(values) - std::log(static_cast<double>(samples));
  });
  return ShellSum::from_logs(shells, std::move(logs));
}

DistortionField::DistortionField(const CuspParams& params, ChartId chart, RegionLabel region,
                                 ShellRange shells, std::size_t samples, std::uint64_t seed,
                                 SamplingMode mode)
    : region_(region), shells_(shells) {
  if (chart_for_region(region) != chart) {
    throw ParameterError("chart " + std::string(to_string(chart)) + " is not defined on " +
                         std::string(to_string(region)));
  }
  if (shells.count() < 1) throw ParameterError("empty shell range");
  if (samples == 0) throw ParameterError("samples per shell must be positive");
  const int n = params.dimension();
  cells_.resize(static_cast<std::size_t>(shells.count()));
  parallel_for(cells_.size(), [&](std::size_t i) {
    const Shell shell(shells.k_min + static_cast<int>(i));
    if (shell_measure(params, region, shell) <= 0.0) return;
    auto& cell = cells_[i];
    cell.reserve(samples);
    const auto ok = [&](const QuadratureNode& node) {
      const ProfilePoint z = node.profile();
      if (interface_gap(params, region, z) <= kInterfaceGap) return false;
      const ProfileJet j = piece_jet(params, region, z);
      cell.push_back({std::log(j.opnorm()), j.log_abs_det(n), node.log_weight, std::log(z.r),
                      std::log(std::abs(z.t))});
      return true;
    };
    accepted_nodes(params, region, shell, samples, seed, mode, ok);
  });
}

ShellSum DistortionField::integrate(double p, double q) const {
  check_pair(p, q);
  const double a = p * q / (p - q);
  const double b = q / (p - q);
  std::vector<double> logs(cells_.size(), kNegInf);
  std::vector<double> values;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& cell = cells_[i];
    if (cell.empty()) continue;
    values.clear();
    for (const auto& smp : cell) values.push_back(a * smp.log_opnorm - b * smp.log_abs_det + smp.log_weight);
    logs[i] = log_sum_exp(values) - std::log(static_cast<double>(cell.size()));
  }
  return ShellSum::from_logs(shells_, std::move(logs));
}

std::vector<std::pair<double, double>> DistortionField::shell_extrema(double a, double b) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(cells_.size());
  for (const auto& cell : cells_) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& smp : cell) {
      const double v = std::exp(a * smp.log_opnorm + b * smp.log_r);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    out.emplace_back(hi, cell.empty() ? 0.0 : lo);
  }
  return out;
}

ShellSum distortion_integral(const CuspParams& params, ChartId chart, RegionLabel region, double p,
                             double q, ShellRange shells, std::size_t samples, std::uint64_t seed) {
  check_pair(p, q);
  return DistortionField(params, chart, region, shells, samples, seed).integrate(p, q);
}

ShellSum sobolev_seminorm(const CuspParams& params, const TestFunction& u, RegionLabel region,
                          double p, ShellRange shells, std::size_t samples, std::uint64_t seed) {
  if (!(p >= 1.0)) throw WindowError("Sobolev exponent needs p >= 1");
  return shell_integral(params, region, shells, samples, seed, SamplingMode::Uniform,
                        [&](const QuadratureNode& node) {
                          const double g = u.gradient(node.point()).norm();
                          return g > 0.0 ? p * std::log(g) : kNegInf;
                        });
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw ParameterError("a scaling fit needs at least 3 pairs");
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [scale, value] : pairs) {
    if (!(scale > 0.0 && value > 0.0) || !std::isfinite(scale) || !std::isfinite(value)) {
      throw ParameterError("scaling fit needs positive finite data");
    }
    sx += std::log(scale);
    sy += std::log(value);
  }
  const double m = static_cast<double>(pairs.size());
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [scale, value] : pairs) {
    const double dx = std::log(scale) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(value) - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("scaling fit needs at least two distinct scales");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [scale, value] : pairs) {
    const double e = std::log(value) - (fit.intercept + fit.slope * std::log(scale));
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / m);
  return fit;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t threads =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cuspext
