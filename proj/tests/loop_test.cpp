// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "oclmem/baselines.hpp"
#include "oclmem/control_loop.hpp"
#include "oclmem/errors.hpp"
#include "test_support.hpp"

using namespace oclmem;

namespace {

ScenarioConfig neutral(ScenarioConfig sc) {
  sc.controller.batch_sensitivity = 0.0;
  sc.controller.replay_sensitivity = 0.0;
  sc.controller.optimizer_ratio = 1.0;
  return sc;
}

}  // namespace

TEST(ControlLoop, NeutralControllerEqualsFixedPolicy) {
  for (const auto& name : {"xavier-er", "orin-gss", "server-agem"}) {
    const ScenarioConfig sc = neutral(oclmem::testing::bundled(name));
    RunTrace ctl = run_control_loop(sc);
    const RunTrace fixed =
        run_fixed(sc, {sc.initial_batch, sc.initial_buffer, OptimizerMode::kDefault},
                  "controller");
    EXPECT_TRUE(identical(ctl, fixed)) << name;
  }
}

TEST(ControlLoop, OneRecordPerExperience) {
  const ScenarioConfig sc = oclmem::testing::bundled("orin-gem");
  const RunTrace t = run_control_loop(sc);
  ASSERT_EQ(t.outcome, RunOutcome::kCompleted);
  ASSERT_EQ(t.records.size(), 9u);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    EXPECT_EQ(r.experience, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(r.status, RecordStatus::kOk);
    EXPECT_EQ(r.budgets.t, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(r.threshold, threshold_at(sc.controller, static_cast<double>(i)));
    EXPECT_LE(r.budgets.total_mb(), sc.controller.budget_cap_mb() * (1 + 1e-12));
  }
  EXPECT_EQ(t.records[0].knobs.batch_size, sc.initial_batch);
  EXPECT_EQ(t.records[0].knobs.buffer_size, sc.initial_buffer);
  EXPECT_EQ(t.records[0].applied_score, sc.controller.initial_health_score);
}

TEST(ControlLoop, KnobsFollowPreviousBudgets) {
  const ScenarioConfig sc = oclmem::testing::bundled("server-er");
  const RunTrace t = run_control_loop(sc);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    EXPECT_EQ(t.records[i].knobs,
              derive_knobs(t.records[i - 1].budgets, sc.controller));
  }
}

TEST(ControlLoop, DeterministicForSameSeed) {
  ScenarioConfig sc = oclmem::testing::bundled("xavier-gem");
  sc.response.noise = 0.03;
  const RunTrace a = run_control_loop(sc);
  const RunTrace b = run_control_loop(sc);
  EXPECT_TRUE(identical(a, b));
  sc.seed += 1;
  EXPECT_FALSE(identical(a, run_control_loop(sc)));
}

TEST(ControlLoop, NoOomOnAnyBundledScenarioOrPreference) {
  for (const auto& name : oclmem::testing::bundled_names()) {
    for (const char* pref : {"prefer-latency", "balanced", "prefer-ps"}) {
      ScenarioConfig sc = oclmem::testing::bundled(name);
      sc.preference = parse_preference(pref);
      const RunTrace t = run_control_loop(sc);
      EXPECT_EQ(t.outcome, RunOutcome::kCompleted) << name << " " << pref;
      EXPECT_LE(t.peak_memory_mb(), sc.platform.capacity_mb);
    }
  }
}

TEST(ControlLoop, OomStopsTheRunWithNanMetrics) {
  ScenarioConfig sc = oclmem::testing::bundled("xavier-er");
  sc.initial_buffer = 300000;  // far beyond capacity
  sc.controller.safety_margin = 0.0;
  sc.controller.capacity_mb = 1e9;  // let the controller ask for it
  const RunTrace t = run_control_loop(sc);
  EXPECT_EQ(t.outcome, RunOutcome::kOomFailed);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].status, RecordStatus::kOom);
  EXPECT_TRUE(std::isnan(t.records[0].score));
  EXPECT_TRUE(std::isnan(t.final_plasticity()));
}

TEST(ControlLoop, InfeasibleBudgetsPropagate) {
  ScenarioConfig sc = oclmem::testing::bundled("xavier-er");
  sc.controller.min_buffer = 1000000;
  EXPECT_THROW(run_control_loop(sc), InfeasibleBudgetError);
}

TEST(ControlLoop, PrefetchAppliesFromSecondExperience) {
  ScenarioConfig sc = oclmem::testing::bundled("orin-agem");
  const RunTrace t = run_control_loop(sc);
  SimulatedEnvironment env(sc.environment());
  for (const auto& r : t.records) {
    const Probe p = env.probe(static_cast<std::size_t>(r.experience), r.knobs);
    const bool overlapped = r.experience > 1;
    EXPECT_DOUBLE_EQ(r.latency_s,
                     sc.prefetch.latency(p.compute_s, p.load_s, overlapped));
  }
}

TEST(ControlLoop, ResumesFromEnvironmentPosition) {
  const ScenarioConfig sc = oclmem::testing::bundled("orin-er");
  SimulatedEnvironment env(sc.environment());
  env.train_experience(1, {sc.initial_batch, sc.initial_buffer,
                           OptimizerMode::kDefault});
  const RunTrace t = run_control_loop(sc, env);
  ASSERT_EQ(t.records.size(), 8u);
  EXPECT_EQ(t.records.front().experience, 2);
}
