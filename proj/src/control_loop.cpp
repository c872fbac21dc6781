// SPDX-License-Identifier: Apache-2.0
#include "oclmem/control_loop.hpp"

#include <limits>
#include <stdexcept>

namespace oclmem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BudgetController make_controller(const ScenarioConfig& sc) {
  return BudgetController(
      sc.controller, sc.preference.weights(), sc.thresholds,
      initial_budgets(sc.controller, sc.initial_batch, sc.initial_buffer),
      sc.deviation);
}

}  // namespace

ControllerPolicy::ControllerPolicy(const ScenarioConfig& scenario)
    : controller_(make_controller(scenario)) {}

FixedPolicy::FixedPolicy(const ScenarioConfig& scenario, const Knobs& knobs)
    : config_(scenario.controller),
      weights_(scenario.preference.weights()),
      thresholds_(scenario.thresholds),
      deviation_(scenario.deviation),
      knobs_(knobs) {
  if (knobs.batch_size < 1 || knobs.buffer_size < 1) {
    throw std::invalid_argument("fixed knobs must be >= 1");
  }
}

BudgetController::Step FixedPolicy::observe(double p, double s, double l,
                                            double m) {
  MetricSnapshot snap{p, s, l, m, thresholds_};
  BudgetController::Step step;
  step.score = compute_urge(snap, weights_, deviation_);
  step.applied_score = t_ == 0 ? config_.initial_health_score : step.score.value;
  step.threshold = threshold_at(config_, static_cast<double>(t_));
  ++t_;
  step.budgets.batch_mb =
      static_cast<double>(knobs_.batch_size) * config_.batch_sample_mb;
  step.budgets.replay_mb =
      static_cast<double>(knobs_.buffer_size) * config_.replay_frame_mb;
  step.budgets.optimizer_mb = config_.optimizer_mb(knobs_.optimizer);
  step.budgets.t = t_;
  return step;
}

RunTrace run_loop(const ScenarioConfig& scenario, SimulatedEnvironment& env,
                  LoopPolicy& policy, const std::string& policy_name) {
  RunTrace trace;
  trace.scenario = scenario.name;
  trace.policy = policy_name;
  trace.planned_experiences = scenario.num_experiences;
  trace.records.reserve(static_cast<std::size_t>(scenario.num_experiences));

  const auto n = static_cast<std::size_t>(scenario.num_experiences);
  for (std::size_t e = env.next_experience(); e <= n; ++e) {
    TraceRecord rec;
    rec.experience = static_cast<std::int64_t>(e);
    rec.knobs = policy.knobs();
    const TrainResult r = env.train_experience(e, rec.knobs);
    rec.latency_s = r.latency_s;
    rec.memory_peak_mb = r.memory_peak_mb;
    if (r.oom) {
      rec.status = RecordStatus::kOom;
      rec.score = rec.applied_score = rec.threshold = kNaN;
      rec.plasticity = rec.stability = kNaN;
      trace.records.push_back(rec);
      trace.outcome = RunOutcome::kOomFailed;
      return trace;
    }
    rec.plasticity = plasticity(env.accuracy(), e);
    rec.stability = stability(env.accuracy(), e);
    const auto step =
        policy.observe(rec.plasticity, rec.stability, rec.latency_s,
                       rec.memory_peak_mb);
    rec.score = step.score.value;
    rec.applied_score = step.applied_score;
    rec.threshold = step.threshold;
    rec.budgets = step.budgets;
    if (e < n) env.prefetch_next(e + 1);
    trace.records.push_back(rec);
  }
  trace.outcome = RunOutcome::kCompleted;
  return trace;
}

RunTrace run_control_loop(const ScenarioConfig& scenario,
                          SimulatedEnvironment& env) {
  ControllerPolicy policy(scenario);
  return run_loop(scenario, env, policy, "controller");
}

RunTrace run_control_loop(const ScenarioConfig& scenario) {
  SimulatedEnvironment env(scenario.environment());
  return run_control_loop(scenario, env);
}

}  // namespace oclmem
