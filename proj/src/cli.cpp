#include "cuspext/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuspext/experiments.hpp"
#include "cuspext/reflections.hpp"
#include "cuspext/verify.hpp"

namespace cuspext {

namespace {

struct Common {
  int n = 3;
  double s = 2.0;
  std::string scheme;
  std::string point;
  int k_min = 5;
  int k_max = 30;
  std::size_t samples = 4096;
  std::uint64_t seed = 42;
  std::string out_path;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw ParameterError(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ParameterError(std::string("empty ") + what + " list");
  return values;
}

Point parse_point(const Common& c) {
  if (c.point.empty()) throw ParameterError("--point is required");
  const auto coords = parse_list(c.point, "--point");
  if (static_cast<int>(coords.size()) != c.n) {
    throw ParameterError("--point needs " + std::to_string(c.n) + " coordinates, got " +
                         std::to_string(coords.size()));
  }
  return Point::from_coords(coords);
}

Scheme parse_scheme(const std::string& name) {
  if (name == "r1" || name == "r1-outer" || name == "r1-inner") return Scheme::R1;
  if (name == "r2" || name == "r2-outer") return Scheme::R2;
  throw ParameterError("unknown scheme '" + name + "'");
}

ChartId parse_chart(const std::string& name) {
  if (name == "r1") return ChartId::R1Outer;
  if (name == "r2") return ChartId::R2Outer;
  return chart_from_string(name);
}

std::string clean(double v) { return fmt(v == 0.0 ? 0.0 : v); }

std::string join(const Point& z) {
  std::string out = clean(z.t);
  for (double v : z.x) out += ',' + clean(v);
  return out;
}

void emit(const std::string& command, const std::vector<std::string>& args, const Common& c,
          const std::string& csv, std::chrono::steady_clock::time_point start, std::ostream& out) {
  if (c.out_path.empty()) {
    out << csv;
    return;
  }
  std::ofstream file(c.out_path, std::ios::binary);
  if (!file) throw ParameterError("cannot open output file '" + c.out_path + "'");
  file << csv;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest{
      {"command", command},
      {"flags", args},
      {"n", c.n},
      {"s", c.s},
      {"seed", c.seed},
      {"version", CUSPEXT_VERSION},
      {"wall_time_seconds", wall},
      {"output", c.out_path},
  };
  std::ofstream(c.out_path + ".manifest.json") << manifest.dump(2) << '\n';
}

void add_params(CLI::App* sub, Common& c) {
  sub->add_option("--n", c.n, "dimension (>= 3)");
  sub->add_option("--s", c.s, "cusp degree (> 1)");
}

void add_run(CLI::App* sub, Common& c) {
  sub->add_option("--kmin", c.k_min, "first shell index");
  sub->add_option("--kmax", c.k_max, "last shell index");
  sub->add_option("--samples", c.samples, "samples per shell");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--out", c.out_path, "CSV output path (a manifest is written next to it)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Cusp reflections, composition operators and extension experiments", "cuspext"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CUSPEXT_VERSION));

  Common c;
  std::string p_list;
  std::string q_list;
  std::string t_list;
  std::string regions;
  std::string u = "power:1.4";
  std::string direction = "inside";
  double p = 2.0;
  double q = 1.1;
  bool fault = false;
  std::size_t sweep_samples = 1024;

  auto* classify_cmd = app.add_subcommand("classify", "region label of a point");
  auto* reflect_cmd = app.add_subcommand("reflect", "image of a point under a chart");
  auto* jacobian_cmd = app.add_subcommand("jacobian", "operator norm and determinant of the differential");
  auto* invert_cmd = app.add_subcommand("invert", "preimage of a point under a chart");
  for (auto* sub : {classify_cmd, reflect_cmd, jacobian_cmd, invert_cmd}) {
    add_params(sub, c);
    sub->add_option("--scheme", c.scheme, "r1, r2, r1-outer, r1-inner or r2-outer")->required();
    sub->add_option("--point", c.point, "t,x1,...,x_{n-1}")->required()->allow_extra_args(false);
  }

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  add_params(verify_cmd, c);
  verify_cmd->add_option("--seed", c.seed, "random seed");
  verify_cmd->add_option("--out", c.out_path, "CSV output path");
  verify_cmd->add_option("--sweep-samples", sweep_samples, "samples per shell in the window sweep");
  verify_cmd->add_flag("--fault-negate-entry", fault, "test hook: corrupt one analytic entry");

  auto* sweep_cmd = app.add_subcommand("sweep", "(p, q) window sweep");
  add_params(sweep_cmd, c);
  add_run(sweep_cmd, c);
  sweep_cmd->add_option("--scheme", c.scheme, "r1, r2 or both");
  sweep_cmd->add_option("--p", p_list, "comma-separated p values (default grid)");
  sweep_cmd->add_option("--q", q_list, "comma-separated q values (default grid)");

  auto* scaling_cmd = app.add_subcommand("scaling", "Jacobian scaling laws");
  add_params(scaling_cmd, c);
  scaling_cmd->add_option("--kmin", c.k_min, "first shell index");
  scaling_cmd->add_option("--kmax", c.k_max, "last shell index");
  scaling_cmd->add_option("--regions", regions, "comma-separated regions (default A,B,C,D,E)");
  scaling_cmd->add_option("--out", c.out_path, "CSV output path");

  auto* extend_cmd = app.add_subcommand("extendnorm", "shell-resolved norms of an extension");
  add_params(extend_cmd, c);
  add_run(extend_cmd, c);
  extend_cmd->add_option("--scheme", c.scheme, "r1 or r2");
  extend_cmd->add_option("--direction", direction, "inside or outside");
  extend_cmd->add_option("--u", u, "power:A, clamp, const:C or bump:RHO,t,x1,...");
  extend_cmd->add_option("--p", p, "source exponent");
  extend_cmd->add_option("--q", q, "target exponent");

  auto* holder_cmd = app.add_subcommand("holder", "oscillation against diameter near the tip");
  add_params(holder_cmd, c);
  holder_cmd->add_option("--t", t_list, "comma-separated heights in (0, 1/2)");
  holder_cmd->add_option("--out", c.out_path, "CSV output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CUSPEXT_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }

  try {
    if (*verify_cmd) {
      VerifyOptions options;
      options.n = c.n;
      options.s = c.s;
      options.seed = c.seed;
      options.fault_negate_entry = fault;
      options.sweep_samples = sweep_samples;
      const auto results = run_verify(options);
      emit("verify", args, c, verify_csv(results), start, out);
      bool ok = true;
      for (const auto& r : results) ok = ok && r.pass;
      if (!ok) err << "verify: at least one invariant failed\n";
      return ok ? kExitOk : kExitVerifyFailed;
    }

    const CuspParams params(c.n, c.s);
    const ShellRange shells{c.k_min, c.k_max};
    if (shells.k_min < 0 || shells.k_max < shells.k_min) throw ParameterError("invalid shell range");

    if (*classify_cmd) {
      out << to_string(classify(params, parse_scheme(c.scheme), parse_point(c))) << '\n';
    } else if (*reflect_cmd) {
      out << join(apply(parse_chart(c.scheme), params, parse_point(c))) << '\n';
    } else if (*invert_cmd) {
      out << join(invert(parse_chart(c.scheme), params, parse_point(c))) << '\n';
    } else if (*jacobian_cmd) {
      const Jet jet = differential(parse_chart(c.scheme), params, parse_point(c));
      out << "opnorm=" << clean(jet.opnorm) << " det=" << clean(jet.det) << '\n';
    } else if (*sweep_cmd) {
      SweepConfig config = SweepConfig::grid(c.n, c.s);
      if (!c.scheme.empty() && c.scheme != "both") config.schemes = {parse_scheme(c.scheme)};
      if (!p_list.empty()) config.p_values = parse_list(p_list, "--p");
      if (!q_list.empty()) {
        config.q_values = parse_list(q_list, "--q");
        config.q_gap = 0.0;
      }
      config.shells = shells;
      config.samples = c.samples;
      config.seed = c.seed;
      emit("sweep", args, c, to_csv(run_sweep(config)), start, out);
    } else if (*scaling_cmd) {
      ScalingConfig config;
      config.n = c.n;
      config.s = c.s;
      config.shells = {c.k_min, scaling_cmd->count("--kmax") > 0 ? c.k_max : 20};
      if (!regions.empty()) {
        config.regions.clear();
        std::stringstream ss(regions);
        std::string item;
        while (std::getline(ss, item, ',')) config.regions.push_back(region_from_string(item));
      }
      emit("scaling", args, c, to_csv(run_scaling(config)), start, out);
    } else if (*extend_cmd) {
      ExtendNormConfig config;
      config.n = c.n;
      config.s = c.s;
      config.spec.scheme = c.scheme.empty() ? Scheme::R1 : parse_scheme(c.scheme);
      if (direction == "inside") config.spec.direction = Direction::FromInside;
      else if (direction == "outside") config.spec.direction = Direction::FromOutside;
      else throw ParameterError("unknown direction '" + direction + "'");
      config.spec.validate();
      config.u = u;
      config.p = p;
      config.q = q;
      config.shells = shells;
      config.samples = c.samples;
      config.seed = c.seed;
      const auto result = run_extendnorm(config);
      emit("extendnorm", args, c, to_csv(kExtendNormHeader, result.rows), start, out);
    } else if (*holder_cmd) {
      HolderConfig config;
      config.n = c.n;
      config.s = c.s;
      if (!t_list.empty()) config.t_values = parse_list(t_list, "--t");
      const auto result = run_holder(config);
      emit("holder", args, c, to_csv(kHolderHeader, result.rows), start, out);
    }
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace cuspext
