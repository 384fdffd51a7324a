#include "cuspext/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace cuspext {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<RegionLabel> sweep_regions(Scheme scheme) {
  if (scheme == Scheme::R1) return {RegionLabel::RegionA, RegionLabel::RegionB, RegionLabel::RegionC};
  return {RegionLabel::RegionD, RegionLabel::RegionE};
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(a + (b - a) * i / (count - 1));
  return out;
}

int severity(const std::string& verdict) {
  if (verdict == "Divergent") return 2;
  if (verdict == "Inconclusive") return 1;
  return 0;
}

std::string agreement(const std::string& verdict, bool predicted_convergent) {
  if (verdict == "Convergent") return predicted_convergent ? "true" : "false";
  if (verdict == "Divergent") return predicted_convergent ? "false" : "true";
  return "na";
}

}  // namespace

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SweepConfig SweepConfig::grid(int n, double s) {
  SweepConfig c;
  c.n = n;
  c.s = s;
  c.q_values = linspace(1.0, 5.95, 21);
  c.q_gap = 0.05;
  return c;
}

std::string SweepRow::csv() const {
  std::string out;
  out += std::to_string(n) + ',' + fmt(s) + ',' + std::string(to_string(scheme)) + ',' + region + ',';
  out += fmt(p) + ',' + fmt(q) + ',' + fmt(q_max_theory) + ',' + (admissible_theory ? "true" : "false");
  out += ',' + fmt(e_predicted) + ',' + std::to_string(k_min) + ',' + std::to_string(k_max) + ',';
  out += fmt(partial_sum) + ',' + fmt(last_ratio) + ',' + verdict + ',' + agrees + ',' +
         std::to_string(seed);
  return out;
}

bool admissible(Scheme scheme, double p, double q, int n, double s) {
  return q < q_max(scheme, p, n, s) * (1.0 - 1e-12);
}

double critical_margin(Scheme scheme, double p, double q, int n, double s) {
  return std::abs(q - q_max(scheme, p, n, s));
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  const CuspParams params(config.n, config.s);
  std::vector<SweepRow> rows;
  for (Scheme scheme : config.schemes) {
    std::vector<double> ps = config.p_values;
    if (ps.empty()) ps = linspace(1.1 * p_min(scheme, config.n, config.s), 6.0, 21);
    std::vector<double> qs = config.q_values;
    if (qs.empty()) qs = linspace(1.0, 5.95, 21);

    std::map<RegionLabel, DistortionField> fields;
    for (RegionLabel region : sweep_regions(scheme)) {
      fields.emplace(region, DistortionField(params, chart_for_region(region), region,
                                             config.shells, config.samples, config.seed));
    }

    for (double p : ps) {
      for (double q : qs) {
        SweepRow base;
        base.n = config.n;
        base.s = config.s;
        base.scheme = scheme;
        base.p = p;
        base.q = q;
        base.q_max_theory = q_max(scheme, p, config.n, config.s);
        base.admissible_theory = admissible(scheme, p, q, config.n, config.s);
        base.k_min = config.shells.k_min;
        base.k_max = config.shells.k_max;
        base.seed = config.seed;

        if (q >= p || q > p - config.q_gap || q < 1.0) {
          for (RegionLabel region : sweep_regions(scheme)) {
            SweepRow row = base;
            row.region = std::string(to_string(region));
            row.e_predicted = kNaN;
            row.partial_sum = kNaN;
            row.last_ratio = kNaN;
            row.verdict = "WindowError";
            row.agrees = "na";
            rows.push_back(row);
          }
          SweepRow all = base;
          all.region = "all";
          all.e_predicted = kNaN;
          all.partial_sum = kNaN;
          all.last_ratio = kNaN;
          all.verdict = "WindowError";
          all.agrees = "na";
          rows.push_back(all);
          continue;
        }

        SweepRow all = base;
        all.region = "all";
        all.e_predicted = std::numeric_limits<double>::infinity();
        all.partial_sum = 0.0;
        all.last_ratio = 0.0;
        all.verdict = "Convergent";
        for (RegionLabel region : sweep_regions(scheme)) {
          const ShellSum sum = fields.at(region).integrate(p, q);
          const Verdict v = convergence_verdict(sum);
          SweepRow row = base;
          row.region = std::string(to_string(region));
          row.e_predicted = predicted_shell_exponent(region, p, q, config.n, config.s);
          row.partial_sum = sum.total();
          row.last_ratio = sum.last_ratio();
          row.verdict = std::string(to_string(v.kind));
          row.agrees = agreement(row.verdict, row.e_predicted > -1.0);
          rows.push_back(row);

          all.e_predicted = std::min(all.e_predicted, row.e_predicted);
          all.partial_sum += row.partial_sum;
          all.last_ratio = std::max(all.last_ratio, row.last_ratio);
          if (severity(row.verdict) > severity(all.verdict)) all.verdict = row.verdict;
        }
        all.agrees = agreement(all.verdict, all.admissible_theory);
        rows.push_back(all);
      }
    }
  }
  return rows;
}

std::string ScalingRow::csv() const {
  return std::string(to_string(region)) + ',' + fmt(scale) + ',' + fmt(opnorm) + ',' + fmt(abs_det) +
         ',' + fmt(fitted_slope) + ',' + fmt(target_slope);
}

Point scaling_point(const CuspParams& params, RegionLabel region, double scale) {
  const int n = params.dimension();
  const double s = params.degree();
  switch (region) {
    case RegionLabel::RegionA:
      return Point::on_axis_plane(n, -scale, 0.5 * scale);
    case RegionLabel::RegionB:
      return Point::on_axis_plane(n, 0.0, scale);
    case RegionLabel::RegionC:
      return Point::on_axis_plane(n, scale, 0.5 * scale);
    case RegionLabel::RegionD:
      return Point::on_axis_plane(n, -scale, 0.5 * std::pow(scale, s));
    case RegionLabel::RegionE:
      return Point::on_axis_plane(n, 0.0, scale);
    case RegionLabel::InnerPiece1:
      return Point::on_axis_plane(n, scale, std::pow(scale, s) / 12.0);
    case RegionLabel::InnerPiece2:
      return Point::on_axis_plane(n, scale, std::pow(scale, s) / 4.0);
    case RegionLabel::InnerPiece3:
      return Point::on_axis_plane(n, scale, std::pow(scale, s) * 2.0 / 3.0);
    default:
      throw ParameterError("no scaling experiment for " + std::string(to_string(region)));
  }
}

double scaling_target(const CuspParams& params, RegionLabel region) {
  const int n = params.dimension();
  const double s = params.degree();
  switch (region) {
    case RegionLabel::RegionA:
    case RegionLabel::RegionB:
    case RegionLabel::RegionC:
      return (n - 1) * (s - 1.0);
    case RegionLabel::RegionD:
      return 0.0;
    case RegionLabel::RegionE:
      return -(s - 1.0) / s;
    case RegionLabel::InnerPiece1:
    case RegionLabel::InnerPiece2:
    case RegionLabel::InnerPiece3:
      return -(n - 1) * (s - 1.0);
    default:
      throw ParameterError("no scaling experiment for " + std::string(to_string(region)));
  }
}

std::vector<ScalingRow> run_scaling(const ScalingConfig& config) {
  const CuspParams params(config.n, config.s);
  std::vector<ScalingRow> rows;
  for (RegionLabel region : config.regions) {
    const ChartId chart = chart_for_region(region);
    std::vector<ScalingRow> block;
    std::vector<std::pair<double, double>> pairs;
    for (int k = config.shells.k_min; k <= config.shells.k_max; ++k) {
      const double scale = 0.75 * std::ldexp(1.0, -k);
      const Jet jet = differential(chart, params, scaling_point(params, region, scale));
      ScalingRow row{region, scale, jet.opnorm, std::abs(jet.det), 0.0,
                     scaling_target(params, region)};
      pairs.emplace_back(scale, region == RegionLabel::RegionE ? row.opnorm : row.abs_det);
      block.push_back(row);
    }
    const ScalingFit fit = scaling_fit(pairs);
    for (auto& row : block) {
      row.fitted_slope = fit.slope;
      rows.push_back(row);
    }
  }
  return rows;
}

ExtendNormResult run_extendnorm(const ExtendNormConfig& config) {
  const CuspParams params(config.n, config.s);
  const TestFunction u = TestFunction::parse(config.u);
  ExtendNormResult result;
  result.report = extension_norm_experiment(config.spec, params, u, config.p, config.q,
                                            config.shells, config.samples, config.seed);
  const auto& rep = result.report;
  const std::string verdict(to_string(rep.verdict.kind));
  for (std::size_t i = 0; i < rep.combined.contributions.size(); ++i) {
    result.rows.push_back(std::to_string(i) + ',' +
                          std::to_string(config.shells.k_min + static_cast<int>(i)) + ',' +
                          fmt(rep.value_term.contributions[i]) + ',' +
                          fmt(rep.grad_term.contributions[i]) + ',' +
                          fmt(rep.combined.partial_sums[i]) + ',' + verdict);
  }
  return result;
}

HolderResult run_holder(const HolderConfig& config) {
  const CuspParams params(config.n, config.s);
  std::vector<double> ts = config.t_values;
  if (ts.empty()) {
    for (int k = 3; k <= 10; ++k) ts.push_back(std::ldexp(1.0, -k));
  }
  HolderResult result;
  result.probe = holder_probe(params, ts);
  for (const auto& row : result.probe.rows) {
    result.rows.push_back(fmt(row.t) + ',' + fmt(row.osc) + ',' + fmt(row.diam) + ',' +
                          fmt(result.probe.fit.slope));
  }
  return result;
}

std::string to_csv(const char* header, const std::vector<std::string>& rows) {
  std::string out = header;
  out += '\n';
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& r : rows) lines.push_back(r.csv());
  return to_csv(kSweepHeader, lines);
}

std::string to_csv(const std::vector<ScalingRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& r : rows) lines.push_back(r.csv());
  return to_csv(kScalingHeader, lines);
}

}  // namespace cuspext
