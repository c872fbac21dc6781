// SPDX-License-Identifier: Apache-2.0
#include "oclmem/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "oclmem/control_loop.hpp"
#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void sort_traces(std::vector<RunTrace>& traces) {
  std::stable_sort(traces.begin(), traces.end(),
                   [](const RunTrace& a, const RunTrace& b) {
                     if (a.scenario != b.scenario) return a.scenario < b.scenario;
                     return a.policy < b.policy;
                   });
}

std::string number(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ConfigError("unterminated quote in CSV line");
  return fields;
}

double parse_double(const std::string& s) {
  if (s.empty()) return kNaN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("bad number '" + s + "' in CSV");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw ConfigError("bad integer '" + s + "' in CSV");
  }
  return v;
}

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

PolicyKind parse_policy(std::string_view name) {
  if (name == "controller") return PolicyKind::kController;
  if (name == "max_a") return PolicyKind::kMaxA;
  if (name == "max_p") return PolicyKind::kMaxP;
  if (name == "fixed-proxy" || name == "fixed") return PolicyKind::kFixed;
  if (name == "oracle") return PolicyKind::kOracle;
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kController: return "controller";
    case PolicyKind::kMaxA: return "max_a";
    case PolicyKind::kMaxP: return "max_p";
    case PolicyKind::kFixed: return "fixed-proxy";
    case PolicyKind::kOracle: return "oracle";
  }
  return "?";
}

std::vector<ReportRow> Report::rows() const {
  std::vector<ReportRow> out;
  out.reserve(traces.size());
  for (const auto& t : traces) {
    out.push_back({t.scenario, t.policy, t.total_latency_s(),
                   t.final_plasticity(), t.final_stability(),
                   t.peak_memory_mb(), t.records.size(), t.outcome});
  }
  return out;
}

Report run_suite(const ScenarioConfig& scenario,
                 std::span<const PolicyKind> policies, Execution exec) {
  if (policies.empty()) throw std::invalid_argument("policy list is empty");
  Report report;
  for (PolicyKind p : policies) {
    switch (p) {
      case PolicyKind::kController:
        report.traces.push_back(run_control_loop(scenario));
        break;
      case PolicyKind::kMaxA:
        report.traces.push_back(run_baseline(BaselineKind::kMaxA, scenario));
        break;
      case PolicyKind::kMaxP:
        report.traces.push_back(run_baseline(BaselineKind::kMaxP, scenario));
        break;
      case PolicyKind::kFixed:
        report.traces.push_back(run_baseline(BaselineKind::kFixed, scenario));
        break;
      case PolicyKind::kOracle: {
        auto oracle = run_oracle(scenario, exec);
        for (auto& t : oracle.traces) report.traces.push_back(std::move(t));
        break;
      }
    }
  }
  sort_traces(report.traces);
  return report;
}

Report merge_reports(std::vector<Report> parts) {
  Report out;
  for (auto& p : parts) {
    for (auto& t : p.traces) out.traces.push_back(std::move(t));
  }
  sort_traces(out.traces);
  return out;
}

std::string emit_report(const Report& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& t : report.traces) {
      for (const auto& r : t.records) {
        out += quote(t.scenario) + ',' + quote(t.policy) + ',' +
               std::to_string(r.experience) + ',' +
               std::to_string(r.knobs.batch_size) + ',' +
               std::to_string(r.knobs.buffer_size) + ',' +
               std::string(to_string(r.knobs.optimizer)) + ',' +
               number(r.score) + ',' + number(r.threshold) + ',' +
               number(r.latency_s) + ',' + number(r.memory_peak_mb) + ',' +
               number(r.plasticity) + ',' + number(r.stability) + ',' +
               std::string(to_string(r.status)) + '\n';
      }
    }
    return out;
  }
  for (const auto& t : report.traces) {
    for (const auto& r : t.records) {
      nlohmann::ordered_json j;
      j["scenario"] = t.scenario;
      j["policy"] = t.policy;
      j["experience"] = r.experience;
      j["batch"] = r.knobs.batch_size;
      j["buffer"] = r.knobs.buffer_size;
      j["opt_mode"] = to_string(r.knobs.optimizer);
      j["score"] = json_number(r.score);
      j["applied_score"] = json_number(r.applied_score);
      j["threshold"] = json_number(r.threshold);
      j["latency_s"] = r.latency_s;
      j["mem_peak_mb"] = r.memory_peak_mb;
      j["plasticity"] = json_number(r.plasticity);
      j["stability"] = json_number(r.stability);
      j["budget_batch_mb"] = r.budgets.batch_mb;
      j["budget_replay_mb"] = r.budgets.replay_mb;
      j["budget_optimizer_mb"] = r.budgets.optimizer_mb;
      j["outcome"] = to_string(r.status);
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("CSV header does not match the report schema");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) {
      throw ConfigError("CSV line " + std::to_string(lineno) + " has " +
                        std::to_string(f.size()) + " fields, expected 13");
    }
    CsvRecord r;
    r.scenario = f[0];
    r.policy = f[1];
    r.experience = parse_int(f[2]);
    r.batch = parse_int(f[3]);
    r.buffer = parse_int(f[4]);
    r.opt_mode = f[5];
    r.score = parse_double(f[6]);
    r.threshold = parse_double(f[7]);
    r.latency_s = parse_double(f[8]);
    r.mem_peak_mb = parse_double(f[9]);
    r.plasticity = parse_double(f[10]);
    r.stability = parse_double(f[11]);
    r.outcome = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

OverheadSummary measure_overhead(const ScenarioConfig& scenario,
                                 std::size_t repetitions) {
  if (repetitions == 0) repetitions = 1;
  const RunTrace trace = run_control_loop(scenario);

  OverheadSummary s;
  s.repetitions = repetitions;
  s.experiences = trace.completed_experiences();
  s.simulated_training_s = trace.total_latency_s();
  s.state_bytes = sizeof(BudgetController);

  const auto initial = initial_budgets(scenario.controller, scenario.initial_batch,
                                       scenario.initial_buffer);
  const Weights weights = scenario.preference.weights();
  std::int64_t sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    BudgetController c(scenario.controller, weights, scenario.thresholds,
                       initial, scenario.deviation);
    for (const auto& r : trace.records) {
      if (r.status != RecordStatus::kOk) break;
      c.observe(r.plasticity, r.stability, r.latency_s, r.memory_peak_mb);
      sink += c.knobs().batch_size;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  volatile std::int64_t keep = sink;
  (void)keep;

  s.controller_s =
      std::chrono::duration<double>(stop - start).count() /
      static_cast<double>(repetitions);
  s.controller_s_per_experience =
      s.experiences ? s.controller_s / static_cast<double>(s.experiences) : 0.0;
  s.ratio = s.simulated_training_s > 0 ? s.controller_s / s.simulated_training_s
                                       : 0.0;
  return s;
}

PrefetchAblation ablate_prefetch(const ScenarioConfig& scenario) {
  ScenarioConfig on = scenario;
  on.prefetch.enabled = true;
  PrefetchAblation a;
  a.with_prefetch = run_control_loop(on);
  if (a.with_prefetch.outcome != RunOutcome::kCompleted) {
    throw std::runtime_error("controller run of '" + scenario.name +
                             "' did not complete; no ablation");
  }
  a.latency_on_s = a.with_prefetch.total_latency_s();

  ScenarioConfig off = scenario;
  off.prefetch.enabled = false;
  SimulatedEnvironment env(off.environment());
  for (const auto& r : a.with_prefetch.records) {
    const auto res =
        env.train_experience(static_cast<std::size_t>(r.experience), r.knobs);
    a.latency_off_s += res.latency_s;
  }
  return a;
}

double calibrate_load_time(ScenarioConfig scenario, double target,
                           double tolerance) {
  auto reduction_at = [&](double load) {
    scenario.prefetch.load_time_per_sample = load;
    scenario.platform.load_time_per_sample = load;
    return ablate_prefetch(scenario).reduction();
  };
  // Reduction rises with load until loading outgrows the overlap window.
  const double compute_hint =
      scenario.profile.compute_cost_per_sample * scenario.platform.compute_scale;
  double lo = 0.0;
  double hi = compute_hint;
  double prev = reduction_at(hi);
  while (prev < target) {
    const double next = reduction_at(hi * 2.0);
    if (next <= prev) {
      throw CalibrationError("prefetch reduction peaks at " +
                             std::to_string(prev) + ", below target " +
                             std::to_string(target));
    }
    lo = hi;
    hi *= 2.0;
    prev = next;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = reduction_at(mid);
    if (std::abs(r - target) <= tolerance) return mid;
    (r < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oclmem
