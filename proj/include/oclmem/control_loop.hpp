// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "oclmem/controller.hpp"
#include "oclmem/scenario.hpp"
#include "oclmem/simulator.hpp"
#include "oclmem/trace.hpp"

namespace oclmem {

/// Decides the knobs for each experience and digests its metrics.
class LoopPolicy {
 public:
  virtual ~LoopPolicy() = default;
  virtual Knobs knobs() const = 0;
  virtual BudgetController::Step observe(double plasticity, double stability,
                                         double latency_s,
                                         double memory_peak_mb) = 0;
};

/// Adaptive policy: a BudgetController seeded from the scenario.
class ControllerPolicy final : public LoopPolicy {
 public:
  explicit ControllerPolicy(const ScenarioConfig& scenario);
  Knobs knobs() const override { return controller_.knobs(); }
  BudgetController::Step observe(double p, double s, double l,
                                 double m) override {
    return controller_.observe(p, s, l, m);
  }
  const BudgetController& controller() const noexcept { return controller_; }

 private:
  BudgetController controller_;
};

/// Constant knobs. Scores and thresholds are still computed so traces are
/// comparable with the controller's; budgets mirror the fixed knobs.
class FixedPolicy final : public LoopPolicy {
 public:
  FixedPolicy(const ScenarioConfig& scenario, const Knobs& knobs);
  Knobs knobs() const override { return knobs_; }
  BudgetController::Step observe(double p, double s, double l,
                                 double m) override;

 private:
  ControllerConfig config_;
  Weights weights_;
  Thresholds thresholds_;
  DeviationMode deviation_;
  Knobs knobs_;
  std::int64_t t_ = 0;
};

/// Runs experiences 1..N: train with the policy's knobs, score, update,
/// prefetch the next experience. Stops at the first OOM. Infeasible budgets
/// propagate as InfeasibleBudgetError.
RunTrace run_loop(const ScenarioConfig& scenario, SimulatedEnvironment& env,
                  LoopPolicy& policy, const std::string& policy_name);

RunTrace run_control_loop(const ScenarioConfig& scenario,
                          SimulatedEnvironment& env);

/// Fresh environment + controller run.
RunTrace run_control_loop(const ScenarioConfig& scenario);

}  // namespace oclmem
