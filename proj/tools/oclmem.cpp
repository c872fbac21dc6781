// SPDX-License-Identifier: Apache-2.0
// Command-line front end: run suites, oracle sweeps, the prefetch ablation,
// overhead accounting and profile calibration.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oclmem/baselines.hpp"
#include "oclmem/calibration.hpp"
#include "oclmem/errors.hpp"
#include "oclmem/harness.hpp"
#include "oclmem/scenario.hpp"

namespace {

using namespace oclmem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitOom = 3;
constexpr int kExitInfeasible = 4;

struct Common {
  std::vector<std::string> scenarios;
  std::optional<std::uint64_t> seed;
  std::string prefer;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenarios, "Scenario file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the scenario seed");
  cmd->add_option("--prefer", c.prefer,
                  "balanced, prefer-latency, prefer-ps, or a ranking like "
                  "memory,plasticity,stability,latency");
}

void add_output(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Write the report here instead of stdout");
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"csv", "log"}));
}

std::vector<ScenarioConfig> load_all(const Common& c) {
  std::vector<ScenarioConfig> out;
  for (const auto& path : c.scenarios) {
    ScenarioConfig sc = load_scenario(path);
    if (c.seed) sc.seed = *c.seed;
    if (!c.prefer.empty()) {
      sc.preference = parse_preference(c.prefer);
      sc.name += "/" + sc.preference.label;
    }
    out.push_back(std::move(sc));
  }
  return out;
}

void write_report(const Report& report, const Common& c) {
  const auto fmt = c.format == "log" ? ReportFormat::kLog : ReportFormat::kCsv;
  const std::string text = emit_report(report, fmt);
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + c.out + "'");
  f << text;
}

void print_summary(const Report& report, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-22s %12s %8s %8s %10s  %s\n",
                "scenario", "policy", "latency_s", "P", "S", "peak_mb",
                "outcome");
  os << line;
  for (const auto& r : report.rows()) {
    std::snprintf(line, sizeof line,
                  "%-22s %-22s %12.2f %8.4f %8.4f %10.1f  %s\n",
                  r.scenario.c_str(), r.policy.c_str(), r.total_latency_s,
                  r.final_plasticity, r.final_stability, r.peak_memory_mb,
                  std::string(to_string(r.outcome)).c_str());
    os << line;
  }
}

int cmd_run(const Common& c, const std::vector<std::string>& policy_names) {
  std::vector<PolicyKind> policies;
  for (const auto& p : policy_names) policies.push_back(parse_policy(p));
  std::vector<Report> parts;
  for (const auto& sc : load_all(c)) parts.push_back(run_suite(sc, policies));
  const Report report = merge_reports(std::move(parts));
  write_report(report, c);
  print_summary(report, c.out.empty() ? std::cerr : std::cout);
  for (const auto& t : report.traces) {
    if (t.policy == "controller" && t.outcome == RunOutcome::kOomFailed) {
      return kExitOom;
    }
  }
  return kExitOk;
}

int cmd_oracle(const Common& c, bool serial) {
  std::vector<Report> parts;
  std::ostream& os = c.out.empty() ? std::cerr : std::cout;
  for (const auto& sc : load_all(c)) {
    auto result =
        run_oracle(sc, serial ? Execution::kSerial : Execution::kParallel);
    os << sc.name << ": " << result.traces.size() << " runs, "
       << result.oom_count() << " OOM, best ";
    if (result.best) {
      const auto& g = result.grid[*result.best];
      os << "batch=" << g.batch_size << " buffer=" << g.buffer_size
         << " objective=" << oracle_objective(result.traces[*result.best])
         << "\n";
    } else {
      os << "none (every grid point failed)\n";
    }
    Report r;
    r.traces = std::move(result.traces);
    parts.push_back(std::move(r));
  }
  write_report(merge_reports(std::move(parts)), c);
  return kExitOk;
}

int cmd_ablate(const Common& c, std::optional<double> target) {
  for (const auto& sc : load_all(c)) {
    if (target) {
      const double load = calibrate_load_time(sc, *target);
      std::printf("%s: load_time_per_sample=%.9g s for %.1f%% reduction\n",
                  sc.name.c_str(), load, 100.0 * *target);
      continue;
    }
    const auto a = ablate_prefetch(sc);
    std::printf("%s: prefetch off %.2f s, on %.2f s, reduction %.1f%%\n",
                sc.name.c_str(), a.latency_off_s, a.latency_on_s,
                100.0 * a.reduction());
  }
  return kExitOk;
}

int cmd_overhead(const Common& c, std::size_t reps) {
  for (const auto& sc : load_all(c)) {
    const auto o = measure_overhead(sc, reps);
    std::printf(
        "%s: controller %.3g s/run (%.3g ms/experience over %zu experiences), "
        "simulated training %.2f s, overhead %.3g%%, controller state %zu "
        "bytes\n",
        sc.name.c_str(), o.controller_s, 1e3 * o.controller_s_per_experience,
        o.experiences, o.simulated_training_s, 100.0 * o.ratio, o.state_bytes);
  }
  std::printf("(controller-attributable cost only; framework costs are not "
              "simulated)\n");
  return kExitOk;
}

int cmd_calibrate(const std::string& targets_path, const std::string& out) {
  const auto targets = load_calibration_targets(targets_path);
  const auto fit = calibrate_profile(targets);
  nlohmann::ordered_json j;
  j["profile"] = {
      {"compute_cost_per_sample", fit.profile.compute_cost_per_sample},
      {"optimizer_latency_multiplier", fit.profile.optimizer_latency_multiplier},
      {"optimizer_memory_delta", fit.profile.optimizer_memory_delta},
      {"base_memory", fit.profile.base_memory}};
  j["response"] = {{"batch_knee", fit.response.batch_knee},
                   {"activation_mb", fit.response.activation_mb},
                   {"frame_mb", fit.response.frame_mb},
                   {"spike_threshold", fit.response.spike_threshold},
                   {"spike_coefficient", fit.response.spike_coefficient},
                   {"stability_max", fit.response.stability_max},
                   {"stability_scale", fit.response.stability_scale}};
  for (const auto& r : fit.residuals) {
    j["residuals"].push_back({{"what", r.what},
                              {"target", r.target},
                              {"fitted", r.fitted},
                              {"relative", r.relative()}});
  }
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-budget controller for on-device continual learning"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> policies = {"controller", "fixed-proxy", "max_a",
                                       "max_p"};
  auto* run = app.add_subcommand("run", "Run controller and baseline policies");
  add_common(run, common);
  add_output(run, common);
  run->add_option("--policy", policies,
                  "controller, max_a, max_p, fixed-proxy, oracle");

  bool serial = false;
  auto* oracle = app.add_subcommand("oracle", "Run the 42-point grid sweep");
  add_common(oracle, common);
  add_output(oracle, common);
  oracle->add_flag("--serial", serial, "Use the serial reference sweep");

  std::optional<double> target;
  auto* ablate = app.add_subcommand("ablate-prefetch",
                                    "Latency with and without prefetching");
  add_common(ablate, common);
  ablate->add_option("--calibrate-target", target,
                     "Solve for the load time giving this reduction (0-1)");

  std::size_t reps = 200;
  auto* overhead = app.add_subcommand("overhead", "Controller cost accounting");
  add_common(overhead, common);
  overhead->add_option("--repetitions", reps, "Timing repetitions");

  std::string targets_path;
  std::string calib_out;
  auto* calibrate =
      app.add_subcommand("calibrate", "Fit a profile to measured targets");
  calibrate->add_option("--targets", targets_path, "Calibration targets file")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", calib_out, "Write the fit here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(common, policies);
    if (*oracle) return cmd_oracle(common, serial);
    if (*ablate) return cmd_ablate(common, target);
    if (*overhead) return cmd_overhead(common, reps);
    if (*calibrate) return cmd_calibrate(targets_path, calib_out);
  } catch (const InfeasibleBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
