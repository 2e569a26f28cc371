#include "lanefree/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lanefree/config.hpp"
#include "lanefree/errors.hpp"
#include "lanefree/geometry.hpp"
#include "lanefree/sim.hpp"
#include "lanefree/trace_io.hpp"
#include "lanefree/verify.hpp"
#include "lanefree/version.hpp"

namespace lanefree::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::string sweep;
};

struct RunResult {
  fs::path dir;
  int code = kExitOk;
  std::string summary;
};

void describe_config_error(std::ostream& err, const ConfigError& e) {
  err << "config error: " << e.what() << '\n';
}

RunResult run_one(const sim::SimConfig& config, const fs::path& dir) {
  RunResult result;
  result.dir = dir;
  const auto trace = sim::run_simulation(config);
  fs::create_directories(dir);
  std::ostringstream summary;
  if (trace.records.empty()) {
    summary << "integrity failure before the first step: " << trace.diagnostic;
    result.code = kExitIntegrity;
    result.summary = summary.str();
    return result;
  }
  const auto metrics = sim::compute_metrics(trace);
  {
    std::ofstream f(dir / "trace.jsonl");
    trace_io::write_trace(f, trace, metrics);
  }
  {
    std::ofstream f(dir / "metrics.json");
    f << trace_io::metrics_json(trace, metrics);
  }
  {
    std::ofstream f(dir / "vehicles.csv");
    trace_io::write_vehicle_csv(f, trace);
  }
  summary << std::setprecision(6) << "status " << sim::status_name(trace.status) << ", d_min "
          << metrics.global_d_min << " m, max |v - v*| at end " << metrics.final_max_speed_error
          << " m/s, max |theta| at end " << metrics.final_max_abs_theta << " rad, monitor "
          << (trace.verdict.passed() ? "passed" : "FAILED");
  if (!trace.verdict.passed()) {
    summary << " (" << trace.verdict.violations << " violations, first at t = "
            << trace.verdict.first_failure_t.value_or(0.0) << ": " << trace.verdict.first_failure
            << ")";
  }
  if (!trace.diagnostic.empty()) summary << "\n  " << trace.diagnostic;
  switch (trace.status) {
    case sim::RunStatus::ok:
      result.code = kExitOk;
      break;
    case sim::RunStatus::monitor_failure:
      result.code = kExitMonitor;
      break;
    case sim::RunStatus::integrity_failure:
      result.code = kExitIntegrity;
      break;
  }
  result.summary = summary.str();
  return result;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  fs::path dir = args.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env && *env ? fs::path(env) : fs::path("lanefree-out");
  }

  // Every configuration is loaded and validated before anything runs.
  std::vector<std::pair<sim::SimConfig, fs::path>> jobs;
  try {
    if (args.sweep.empty()) {
      auto loaded = config::load_config(args.config, args.overrides);
      for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
      jobs.emplace_back(loaded.config, dir);
    } else {
      const auto eq = args.sweep.find('=');
      if (eq == std::string::npos || eq == 0) {
        err << "--sweep expects key=v1,v2,...\n";
        return kExitInput;
      }
      const std::string key = args.sweep.substr(0, eq);
      const auto values = split_csv(args.sweep.substr(eq + 1));
      if (values.empty()) {
        err << "--sweep lists no values\n";
        return kExitInput;
      }
      for (const auto& v : values) {
        auto overrides = args.overrides;
        overrides.push_back(key + "=" + v);
        auto loaded = config::load_config(args.config, overrides);
        for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
        jobs.emplace_back(loaded.config, dir / (key + "=" + v));
      }
    }
  } catch (const ConfigError& e) {
    describe_config_error(err, e);
    return kExitInput;
  }

  std::vector<RunResult> results(jobs.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs.size(), std::thread::hardware_concurrency()));
  try {
    for (std::size_t start = 0; start < jobs.size(); start += workers) {
      std::vector<std::future<RunResult>> batch;
      for (std::size_t k = start; k < std::min(jobs.size(), start + workers); ++k) {
        batch.push_back(std::async(std::launch::async, run_one, jobs[k].first, jobs[k].second));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
    }
  } catch (const ConfigError& e) {
    describe_config_error(err, e);
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "cannot write output: " << e.what() << '\n';
    return kExitInput;
  }

  int code = kExitOk;
  for (const auto& r : results) {
    out << r.dir.string() << ": " << r.summary << '\n';
    code = std::max(code, r.code);
  }
  return code;
}

int cmd_geometry(double sigma, double phi, std::optional<double> p_opt, double a, int grid,
                 std::ostream& out, std::ostream& err) {
  try {
    const double p = p_opt ? *p_opt : geometry::optimal_eccentricity(phi);
    const double L = geometry::safety_distance(sigma, phi, p);
    const double N = geometry::lateral_capacity(a, p, L);
    const double d_max = geometry::max_collision_distance_bruteforce(sigma, phi, p, grid);
    out << std::setprecision(10);
    out << "sigma  " << sigma << " m\n";
    out << "phi    " << phi << " rad\n";
    out << "p      " << p << (p_opt ? "" : "  (optimal)") << '\n';
    out << "L      " << L << " m\n";
    out << "N      " << N << "  (half-width " << a << " m)\n";
    out << "d_max  " << d_max << " m  (brute force, grid " << grid << ")\n";
    out << "gap    " << (L - d_max) << " m  (" << (L - d_max) / L << " of L)\n";
  } catch (const std::exception& e) {
    err << "geometry: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& config_path,
               const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err) {
  sim::SimConfig config;
  try {
    config = config::load_config(config_path, overrides).config;
  } catch (const ConfigError& e) {
    describe_config_error(err, e);
    return kExitInput;
  }
  std::vector<verify::SuiteReport> reports;
  try {
    reports = verify::run(suite, config);
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return kExitInput;
  }
  bool ok = true;
  out << std::setprecision(6);
  for (const auto& r : reports) {
    out << "[" << r.suite << "]\n";
    for (const auto& c : r.checks) {
      out << "  " << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": " << c.measured
          << " (limit " << c.tolerance << ")\n";
    }
    ok = ok && r.passed();
  }
  out << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? kExitOk : kExitMonitor;
}

int cmd_export(const std::string& trace_path, const std::string& kind_name,
               std::optional<double> at, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  try {
    const auto kind = trace_io::parse_export_kind(kind_name);
    const auto trace = trace_io::read_trace(fs::path(trace_path));
    if (out_path.empty() || out_path == "-") {
      trace_io::export_csv(out, trace, kind, at);
    } else {
      std::ofstream f(out_path);
      if (!f) {
        err << "cannot write " << out_path << '\n';
        return kExitInput;
      }
      trace_io::export_csv(f, trace, kind, at);
    }
  } catch (const std::exception& e) {
    err << "export: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized cruise control on lane-free roads: simulation and checks",
               "lanefree"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop simulation");
  simulate->add_option("-c,--config", sim_args.config, "Config file (text or JSON)");
  simulate->add_option("-s,--set", sim_args.overrides, "Override, key=value (repeatable)");
  simulate->add_option("-o,--out", sim_args.out,
                       std::string("Output directory (default $") + kOutputDirEnv +
                           " or ./lanefree-out)");
  simulate->add_option("--sweep", sim_args.sweep,
                       "Run one simulation per value, key=v1,v2,... (parallel)");

  double sigma = 5.0;
  double phi = 0.25;
  std::optional<double> p;
  double a = 7.2;
  int grid = 801;
  auto* geo = app.add_subcommand("geometry", "Safety distance, eccentricity and lateral capacity");
  geo->add_option("--sigma", sigma, "Vehicle length (m)")->capture_default_str();
  geo->add_option("--phi", phi, "Orientation bound (rad)")->capture_default_str();
  geo->add_option("--p", p, "Metric weight (default: optimal for phi)");
  geo->add_option("--a", a, "Road half-width (m)")->capture_default_str();
  geo->add_option("--grid", grid, "Brute-force lattice size")->capture_default_str()
      ->check(CLI::Range(2, 100000));

  std::string suite;
  std::string verify_config;
  std::vector<std::string> verify_overrides;
  auto* ver = app.add_subcommand("verify", "Run self-check suites");
  ver->add_option("suite", suite, "gradients, dissipation, collision, barriers, bounds or all")
      ->required();
  ver->add_option("-c,--config", verify_config, "Config file");
  ver->add_option("-s,--set", verify_overrides, "Override, key=value (repeatable)");

  std::string trace_path;
  std::string kind;
  std::optional<double> at;
  std::string export_out;
  auto* exp = app.add_subcommand("export", "Plot-ready CSV from a trace");
  exp->add_option("-t,--trace", trace_path, "trace.jsonl")->required();
  exp->add_option("-k,--kind", kind,
                  "speeds, accelerations, lateral, orientation, dmin or snapshots")
      ->required();
  exp->add_option("--at", at, "Snapshot time (s); default the last record");
  exp->add_option("-o,--out", export_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  if (*simulate) return cmd_simulate(sim_args, out, err);
  if (*geo) return cmd_geometry(sigma, phi, p, a, grid, out, err);
  if (*ver) return cmd_verify(suite, verify_config, verify_overrides, out, err);
  return cmd_export(trace_path, kind, at, export_out, out, err);
}

}  // namespace lanefree::cli
