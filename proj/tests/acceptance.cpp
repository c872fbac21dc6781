// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are pinned here.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oclmem/baselines.hpp"
#include "oclmem/calibration.hpp"
#include "oclmem/control_loop.hpp"
#include "oclmem/controller.hpp"
#include "oclmem/harness.hpp"
#include "oclmem/metrics.hpp"
#include "oclmem/scenario.hpp"
#include "oclmem/urge.hpp"

namespace {

using namespace oclmem;

constexpr double kMultiplierTol = 1e-12;
constexpr double kWeightSumTol = 1e-9;
constexpr double kNeutralTol = 1e-12;
constexpr double kRuntimeLimitS = 60.0;
constexpr std::size_t kOracleOomMin = 7;
constexpr std::size_t kOracleOomMax = 15;
constexpr double kServerReductionMin = 0.30;
constexpr double kServerReductionMax = 0.40;
constexpr double kEmbeddedReductionMin = 0.28;
constexpr double kEmbeddedReductionMax = 0.38;
constexpr double kAnchorTol = 0.15;
constexpr double kOverheadMax = 0.021;
constexpr std::size_t kStateMaxBytes = 10 * 1024;

const std::filesystem::path kData = OCLMEM_DATA_DIR;
const std::array<const char*, 3> kPlatforms = {"xavier", "orin", "server"};
const std::array<const char*, 4> kAlgorithms = {"er", "gss", "gem", "agem"};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioConfig scenario(const std::string& name) {
  return load_scenario(kData / "scenarios" / (name + ".json"));
}

std::vector<std::string> all_scenarios() {
  std::vector<std::string> out;
  for (auto p : kPlatforms) {
    for (auto a : kAlgorithms) out.push_back(std::string(p) + "-" + a);
  }
  return out;
}

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Verdict formula_exactness() {
  ControllerConfig c;
  c.batch_sample_mb = 1.0;
  c.replay_frame_mb = 1.0;
  c.optimizer_default_mb = 1.0;
  c.capacity_mb = 1e6;
  const BudgetState prev{100.0, 100.0, 1.0, 0};
  c.batch_sensitivity = 0.1;
  const double mb = update_budgets(prev, 0.8, 0.7, c).batch_mb / prev.batch_mb;
  c.batch_sensitivity = 0.0;
  c.replay_sensitivity = 0.2;
  const double mr = update_budgets(prev, 0.8, 0.7, c).replay_mb / prev.replay_mb;
  const double eb = std::abs(mb - 1.01);
  const double er = std::abs(mr - 1.02);
  return {eb <= kMultiplierTol && er <= kMultiplierTol,
          fmt("batch x%.15g (err %.1e), replay x%.15g (err %.1e), tol %.0e", mb,
              eb, mr, er, kMultiplierTol)};
}

Verdict weight_rule() {
  const std::array order = {Metric::kMemory, Metric::kPlasticity,
                            Metric::kStability, Metric::kLatency};
  const Weights w = weights_from_preference(order);
  const bool exact = w.memory == 0.4 && w.plasticity == 0.3 &&
                     w.stability == 0.2 && w.latency == 0.1;
  std::array<Metric, 4> perm = kAllMetrics;
  std::sort(perm.begin(), perm.end());
  int count = 0;
  double worst = 0.0;
  do {
    worst = std::max(worst, std::abs(weights_from_preference(perm).sum() - 1.0));
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {exact && count == 24 && worst <= kWeightSumTol,
          fmt("(%.17g, %.17g, %.17g, %.17g); %d permutations, max |sum-1| %.1e",
              w.memory, w.plasticity, w.stability, w.latency, count, worst)};
}

MetricSnapshot random_snapshot(std::mt19937_64& rng) {
  MetricSnapshot s;
  s.plasticity = unit(rng);
  s.stability = unit(rng);
  s.latency_s = 5000.0 * unit(rng);
  s.memory_peak_mb = 60000.0 * unit(rng);
  s.thresholds = {0.05 + 0.95 * unit(rng), 0.05 + 0.95 * unit(rng),
                  1.0 + 4999.0 * unit(rng), 100.0 + 59900.0 * unit(rng)};
  return s;
}

Weights random_weights(std::mt19937_64& rng) {
  std::array<Metric, 4> order = kAllMetrics;
  std::shuffle(order.begin(), order.end(), rng);
  return weights_from_preference(order);
}

Verdict score_invariants() {
  std::mt19937_64 rng(1001);
  int outside = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = compute_urge(random_snapshot(rng), random_weights(rng)).value;
    if (!(v > 0.0 && v < 1.0)) ++outside;
  }
  double neutral_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    MetricSnapshot s = random_snapshot(rng);
    s.plasticity = s.thresholds.plasticity;
    s.stability = s.thresholds.stability;
    s.latency_s = s.thresholds.latency_s;
    s.memory_peak_mb = s.thresholds.memory_max_mb;
    neutral_err = std::max(
        neutral_err,
        std::abs(compute_urge(s, random_weights(rng)).value - 0.0625));
  }
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const MetricSnapshot b = random_snapshot(rng);
    const Weights w = random_weights(rng);
    const double v = compute_urge(b, w).value;
    MetricSnapshot t = b;
    t.plasticity = b.plasticity + (1.0 - b.plasticity) * unit(rng);
    violations += compute_urge(t, w).value > v;
    t = b;
    t.stability = b.stability + (1.0 - b.stability) * unit(rng);
    violations += compute_urge(t, w).value > v;
    t = b;
    t.latency_s = b.latency_s + 1000.0 * unit(rng);
    violations += compute_urge(t, w).value < v;
    t = b;
    t.memory_peak_mb = b.memory_peak_mb + 5000.0 * unit(rng);
    violations += compute_urge(t, w).value > v;
  }
  return {outside == 0 && neutral_err <= kNeutralTol && violations == 0,
          fmt("%d/10000 outside (0,1); neutral err %.1e; %d/1000 pairs "
              "non-monotone",
              outside, neutral_err, violations)};
}

Verdict metric_oracle() {
  std::mt19937_64 rng(2002);
  int mismatches = 0;
  int stability_one_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    AccuracyMatrix m;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i <= k; ++i) a[k][i] = unit(rng);
      m.append_row(std::span<const double>(a[k].data(), k + 1));
    }
    for (std::size_t k = 1; k <= n; ++k) {
      double sp = 0.0;
      for (std::size_t i = 0; i < k; ++i) sp += a[k - 1][i];
      const double p = sp / static_cast<double>(k);
      double s = 1.0;
      if (k > 1) {
        double f = 0.0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
          f += std::max(0.0, a[i][i] - a[k - 1][i]);
        }
        s = std::clamp(1.0 - f / static_cast<double>(k - 1), 0.0, 1.0);
      }
      if (plasticity(m, k) != p || stability(m, k) != s) ++mismatches;
    }
    if (stability(m, 1) != 1.0) ++stability_one_fail;
  }
  return {mismatches == 0 && stability_one_fail == 0,
          fmt("%d mismatches over 1000 matrices; stability(.,1) != 1 in %d",
              mismatches, stability_one_fail)};
}

Verdict oom_freedom() {
  const auto start = std::chrono::steady_clock::now();
  int runs = 0;
  int ooms = 0;
  std::string first;
  for (const auto& name : all_scenarios()) {
    for (const char* pref : {"prefer-latency", "balanced", "prefer-ps"}) {
      ScenarioConfig sc = scenario(name);
      sc.preference = parse_preference(pref);
      ++runs;
      if (run_control_loop(sc).outcome != RunOutcome::kCompleted) {
        if (first.empty()) first = " (first: " + name + "/" + pref + ")";
        ++ooms;
      }
    }
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return {runs == 36 && ooms == 0 && secs < kRuntimeLimitS,
          fmt("%d controller runs, %d OOM%s, %.2f s", runs, ooms, first.c_str(),
              secs)};
}

Verdict baseline_failures() {
  const ScenarioConfig gss = scenario("xavier-gss");
  const bool maxp = run_baseline(BaselineKind::kMaxP, gss).outcome ==
                    RunOutcome::kOomFailed;
  const bool maxa = run_baseline(BaselineKind::kMaxA, gss).outcome ==
                    RunOutcome::kOomFailed;
  const bool ctl = run_control_loop(gss).outcome == RunOutcome::kCompleted;
  bool counts_ok = true;
  std::string counts;
  for (auto a : kAlgorithms) {
    const auto r = run_oracle(scenario(std::string("xavier-") + a));
    const std::size_t n = r.oom_count();
    counts_ok = counts_ok && n >= kOracleOomMin && n <= kOracleOomMax;
    counts += fmt(" %s=%zu", a, n);
  }
  return {maxp && maxa && ctl && counts_ok,
          fmt("xavier-gss: max_p %s, max_a %s, controller %s; oracle OOM/42:%s "
              "(range %zu-%zu)",
              maxp ? "OOM" : "ok", maxa ? "OOM" : "ok",
              ctl ? "completed" : "failed", counts.c_str(), kOracleOomMin,
              kOracleOomMax)};
}

Verdict oracle_cardinality() {
  bool ok = true;
  std::size_t min_runs = 1000;
  std::size_t max_runs = 0;
  for (const auto& name : all_scenarios()) {
    const ScenarioConfig sc = scenario(name);
    const auto r = run_oracle(sc);
    min_runs = std::min(min_runs, r.traces.size());
    max_runs = std::max(max_runs, r.traces.size());
    ok = ok && r.traces.size() == 42 && r.grid.size() == 42;
  }
  const std::array<PolicyKind, 1> ctl = {PolicyKind::kController};
  const std::size_t controller_runs =
      run_suite(scenario("xavier-er"), ctl).traces.size();
  ok = ok && controller_runs == 1;
  return {ok, fmt("oracle runs per scenario %zu..%zu, controller runs %zu, "
                  "ratio %.0fx",
                  min_runs, max_runs, controller_runs,
                  static_cast<double>(max_runs) /
                      static_cast<double>(controller_runs))};
}

Verdict prefetch_ablation() {
  bool ok = true;
  std::string detail;
  for (auto p : kPlatforms) {
    const bool server = std::string(p) == "server";
    const double lo = server ? kServerReductionMin : kEmbeddedReductionMin;
    const double hi = server ? kServerReductionMax : kEmbeddedReductionMax;
    double mn = 1.0;
    double mx = 0.0;
    for (auto a : kAlgorithms) {
      const double r =
          ablate_prefetch(scenario(std::string(p) + "-" + a)).reduction();
      mn = std::min(mn, r);
      mx = std::max(mx, r);
    }
    ok = ok && mn >= lo && mx <= hi;
    detail += fmt("%s%s %.1f-%.1f%% (band %.0f-%.0f%%)", detail.empty() ? "" : "; ",
                  p, 100 * mn, 100 * mx, 100 * lo, 100 * hi);
  }
  return {ok, detail};
}

Verdict calibration_fidelity() {
  const auto ic = calibrate_profile(
      load_calibration_targets(kData / "targets" / "ic-anchor.json"));
  const double anchors[4][2] = {
      {ic.latency(128, OptimizerMode::kDefault), 73.06},
      {ic.latency(128, OptimizerMode::kAdvanced), 215.13},
      {ic.memory(128, ic.sweep_buffer, OptimizerMode::kDefault), 4100.0},
      {ic.memory(128, ic.sweep_buffer, OptimizerMode::kAdvanced), 4207.0}};
  double worst = 0.0;
  for (const auto& a : anchors) {
    worst = std::max(worst, std::abs(a[0] - a[1]) / a[1]);
  }
  const auto il = calibrate_profile(
      load_calibration_targets(kData / "targets" / "il-trend.json"));
  const double l16 = il.latency(16, OptimizerMode::kDefault);
  const double l256 = il.latency(256, OptimizerMode::kDefault);
  const double m256 = il.memory(256, il.sweep_buffer, OptimizerMode::kDefault);
  const bool ineq = l16 > 2000.0 && l256 < 200.0 && m256 > 6000.0;
  return {worst <= kAnchorTol && ineq,
          fmt("anchors %.2f s/%.2f s/%.0f MB/%.0f MB, worst rel err %.1f%% "
              "(tol %.0f%%); B=16 %.0f s > 2000, B=256 %.0f s < 200, "
              "B=256 %.0f MB > 6000",
              anchors[0][0], anchors[1][0], anchors[2][0], anchors[3][0],
              100 * worst, 100 * kAnchorTol, l16, l256, m256)};
}

Verdict preference_ordering() {
  int ok_count = 0;
  std::string failed;
  for (const auto& name : all_scenarios()) {
    std::array<RunTrace, 3> t;
    const char* prefs[3] = {"prefer-latency", "balanced", "prefer-ps"};
    for (int i = 0; i < 3; ++i) {
      ScenarioConfig sc = scenario(name);
      sc.preference = parse_preference(prefs[i]);
      t[i] = run_control_loop(sc);
    }
    auto inc = [&](auto f) { return f(t[0]) < f(t[1]) && f(t[1]) < f(t[2]); };
    const bool ok =
        inc([](const RunTrace& r) { return r.total_latency_s(); }) &&
        inc([](const RunTrace& r) { return r.final_plasticity(); }) &&
        inc([](const RunTrace& r) { return r.final_stability(); });
    if (ok) {
      ++ok_count;
    } else {
      failed += " " + name;
    }
  }
  return {ok_count == 12,
          fmt("%d/12 scenarios strictly ordered%s%s", ok_count,
              failed.empty() ? "" : "; failed:", failed.c_str())};
}

Verdict determinism_and_overhead() {
  const std::array policies = {PolicyKind::kController, PolicyKind::kFixed,
                               PolicyKind::kMaxA, PolicyKind::kMaxP};
  int identical_count = 0;
  double worst_ratio = 0.0;
  std::size_t state = 0;
  for (const auto& name : all_scenarios()) {
    const ScenarioConfig sc = scenario(name);
    const auto a = emit_report(run_suite(sc, policies), ReportFormat::kCsv);
    const auto b = emit_report(run_suite(sc, policies), ReportFormat::kCsv);
    identical_count += a == b;
    const auto o = measure_overhead(sc);
    worst_ratio = std::max(worst_ratio, o.ratio);
    state = o.state_bytes;
  }
  return {identical_count == 12 && worst_ratio < kOverheadMax &&
              state < kStateMaxBytes,
          fmt("%d/12 CSV byte-identical; max controller/training %.2e%% "
              "(limit %.1f%%); state %zu B (limit %zu B)",
              identical_count, 100 * worst_ratio, 100 * kOverheadMax, state,
              kStateMaxBytes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"formula exactness", formula_exactness},
      {"weight rule", weight_rule},
      {"score invariants", score_invariants},
      {"metric oracle equivalence", metric_oracle},
      {"OOM-freedom", oom_freedom},
      {"baseline failure reproduction", baseline_failures},
      {"oracle cardinality and efficiency", oracle_cardinality},
      {"prefetch ablation", prefetch_ablation},
      {"calibration fidelity", calibration_fidelity},
      {"preference ordering", preference_ordering},
      {"determinism and overhead", determinism_and_overhead},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("[%s] %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
