// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oclmem/baselines.hpp"
#include "oclmem/scenario.hpp"
#include "oclmem/trace.hpp"

namespace oclmem {

enum class PolicyKind { kController, kMaxA, kMaxP, kFixed, kOracle };

/// "controller", "max_a", "max_p", "fixed-proxy" (or "fixed"), "oracle".
PolicyKind parse_policy(std::string_view name);
std::string_view to_string(PolicyKind kind);

struct ReportRow {
  std::string scenario;
  std::string policy;
  double total_latency_s = 0.0;
  double final_plasticity = 0.0;
  double final_stability = 0.0;
  double peak_memory_mb = 0.0;
  std::size_t experiences = 0;
  RunOutcome outcome = RunOutcome::kCompleted;
};

struct Report {
  std::vector<RunTrace> traces;  // sorted by (scenario, policy)

  /// One summary row per trace, in trace order.
  std::vector<ReportRow> rows() const;
};

/// One run per requested policy (42 for "oracle"). Throws
/// std::invalid_argument for an empty policy list; infeasible budgets
/// propagate; OOM is a row outcome.
Report run_suite(const ScenarioConfig& scenario,
                 std::span<const PolicyKind> policies,
                 Execution exec = Execution::kParallel);

/// Concatenates reports and restores the (scenario, policy) order.
Report merge_reports(std::vector<Report> parts);

enum class ReportFormat { kCsv, kLog };

inline constexpr std::string_view kCsvHeader =
    "scenario,policy,experience,batch,buffer,opt_mode,score,threshold,"
    "latency_s,mem_peak_mb,plasticity,stability,outcome";

/// CSV: header plus one line per trace record, numbers with 6 significant
/// digits, NaN as an empty field. Log: one JSON object per record per line.
std::string emit_report(const Report& report, ReportFormat format);

/// Parsed form of one CSV line; missing numbers are NaN.
struct CsvRecord {
  std::string scenario;
  std::string policy;
  std::int64_t experience = 0;
  std::int64_t batch = 0;
  std::int64_t buffer = 0;
  std::string opt_mode;
  double score = 0.0;
  double threshold = 0.0;
  double latency_s = 0.0;
  double mem_peak_mb = 0.0;
  double plasticity = 0.0;
  double stability = 0.0;
  std::string outcome;
};

/// Reads CSV produced by emit_report. Throws ConfigError on a bad header or
/// malformed line.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Controller cost over one run of the scenario. Only the controller's own
/// work is timed (score, threshold, budget update, knob derivation); training
/// is simulated, so its time is the simulated latency.
struct OverheadSummary {
  std::size_t experiences = 0;
  std::size_t repetitions = 0;
  double controller_s = 0.0;  // one run, mean over repetitions
  double controller_s_per_experience = 0.0;
  double simulated_training_s = 0.0;
  double ratio = 0.0;  // controller_s / simulated_training_s
  std::size_t state_bytes = 0;
};

OverheadSummary measure_overhead(const ScenarioConfig& scenario,
                                 std::size_t repetitions = 200);

/// Controller run with the prefetch pipeline on, then the same knob sequence
/// replayed with it off; only latency can differ between the two.
struct PrefetchAblation {
  RunTrace with_prefetch;
  double latency_on_s = 0.0;
  double latency_off_s = 0.0;
  double reduction() const { return 1.0 - latency_on_s / latency_off_s; }
};

/// Throws std::runtime_error if the controller run does not complete.
PrefetchAblation ablate_prefetch(const ScenarioConfig& scenario);

/// Bisects the platform load time per sample until the ablation reduction
/// matches `target` within `tolerance`.
double calibrate_load_time(ScenarioConfig scenario, double target,
                           double tolerance = 1e-4);

}  // namespace oclmem
