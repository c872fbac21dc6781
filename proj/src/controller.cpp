// SPDX-License-Identifier: Apache-2.0
#include "oclmem/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

// Keeps floor(MB / M_batch) from losing a whole unit to rounding noise.
constexpr double kFloorSlack = 1e-9;

std::int64_t floor_count(double budget_mb, double unit_mb, std::int64_t min) {
  const double q = std::floor(budget_mb / unit_mb + kFloorSlack);
  if (!(q >= static_cast<double>(min))) return min;
  return static_cast<std::int64_t>(q);
}

void project(BudgetState& s, const ControllerConfig& c) {
  const double cap = c.budget_cap_mb();
  if (s.total_mb() <= cap) return;
  const double available = cap - s.optimizer_mb;
  const double floors = c.batch_floor_mb() + c.replay_floor_mb();
  if (available < floors) {
    throw InfeasibleBudgetError(
        "optimizer budget " + std::to_string(s.optimizer_mb) +
        " MB leaves " + std::to_string(available) +
        " MB, below the knob floors (" + std::to_string(floors) + " MB)");
  }
  const double scale = available / (s.batch_mb + s.replay_mb);
  s.batch_mb *= scale;
  s.replay_mb *= scale;
  if (s.batch_mb < c.batch_floor_mb()) {
    s.batch_mb = c.batch_floor_mb();
    s.replay_mb = available - s.batch_mb;
  } else if (s.replay_mb < c.replay_floor_mb()) {
    s.replay_mb = c.replay_floor_mb();
    s.batch_mb = available - s.replay_mb;
  }
}

}  // namespace

std::string_view to_string(OptimizerMode m) {
  return m == OptimizerMode::kAdvanced ? "advanced" : "default";
}

OptimizerMode parse_optimizer_mode(std::string_view s) {
  if (s == "advanced") return OptimizerMode::kAdvanced;
  if (s == "default") return OptimizerMode::kDefault;
  throw ConfigError("unknown optimizer mode '" + std::string(s) + "'");
}

void ControllerConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ConfigError("controller config: " + what);
  };
  const double values[] = {initial_threshold,  decay_rate,
                           batch_sensitivity,  replay_sensitivity,
                           batch_sample_mb,    replay_frame_mb,
                           optimizer_default_mb, optimizer_ratio,
                           capacity_mb,        safety_margin,
                           initial_health_score};
  for (double v : values) {
    if (!std::isfinite(v)) fail("all parameters must be finite");
  }
  if (!(initial_threshold > 0.0 && initial_threshold < 1.0))
    fail("initial threshold must lie in (0, 1)");
  if (decay_rate < 0.0) fail("decay rate must be >= 0");
  if (batch_sensitivity < 0.0 || replay_sensitivity < 0.0)
    fail("alpha and beta must be >= 0");
  if (batch_sample_mb <= 0.0 || replay_frame_mb <= 0.0 ||
      optimizer_default_mb <= 0.0)
    fail("M_batch, M_df and MO_default must be positive");
  if (optimizer_ratio < 1.0) fail("optimizer ratio k must be >= 1");
  if (capacity_mb <= optimizer_default_mb)
    fail("capacity must exceed MO_default");
  if (!(safety_margin >= 0.0 && safety_margin < 1.0))
    fail("safety margin must lie in [0, 1)");
  if (min_batch < 1 || min_buffer < 1) fail("knob minimums must be >= 1");
}

double threshold_at(const ControllerConfig& config, double t) {
  if (t < 0.0) throw std::invalid_argument("experience index must be >= 0");
  return config.initial_threshold * std::exp(-config.decay_rate * t);
}

BudgetState initial_budgets(const ControllerConfig& config,
                            std::int64_t batch_size, std::int64_t buffer_size,
                            OptimizerMode mode) {
  config.validate();
  BudgetState s;
  s.batch_mb = static_cast<double>(std::max(batch_size, config.min_batch)) *
               config.batch_sample_mb;
  s.replay_mb = static_cast<double>(std::max(buffer_size, config.min_buffer)) *
                config.replay_frame_mb;
  s.optimizer_mb = config.optimizer_mb(mode);
  s.t = 0;
  project(s, config);
  return s;
}

BudgetState update_budgets(const BudgetState& prev, double score,
                           double threshold, const ControllerConfig& config,
                           bool allow_advanced) {
  if (!std::isfinite(score) || !std::isfinite(threshold)) {
    throw NumericDomainError("score and threshold must be finite");
  }
  BudgetState next = prev;
  if (score >= threshold) {
    const double gap = score - threshold;
    next.batch_mb = prev.batch_mb * (1.0 + config.batch_sensitivity * gap);
    next.replay_mb = prev.replay_mb * (1.0 + config.replay_sensitivity * gap);
    next.optimizer_mb = allow_advanced ? config.optimizer_advanced_mb()
                                       : config.optimizer_default_mb;
  } else {
    const double gap = threshold - score;
    next.batch_mb = std::max(
        prev.batch_mb * (1.0 - config.batch_sensitivity * gap),
        config.batch_floor_mb());
    next.replay_mb = std::max(
        prev.replay_mb * (1.0 - config.replay_sensitivity * gap),
        config.replay_floor_mb());
    next.optimizer_mb = config.optimizer_default_mb;
  }
  project(next, config);
  next.t = prev.t + 1;
  return next;
}

BudgetState update_budgets(const BudgetState& prev, const UrgeScore& score,
                           double threshold, const ControllerConfig& config) {
  return update_budgets(prev, score.value, threshold, config);
}

Knobs derive_knobs(const BudgetState& state, const ControllerConfig& config) {
  Knobs k;
  k.batch_size = floor_count(state.batch_mb, config.batch_sample_mb,
                             config.min_batch);
  k.buffer_size = floor_count(state.replay_mb, config.replay_frame_mb,
                              config.min_buffer);
  k.optimizer = state.optimizer_mb == config.optimizer_advanced_mb() &&
                        config.optimizer_ratio > 1.0
                    ? OptimizerMode::kAdvanced
                    : OptimizerMode::kDefault;
  return k;
}

BudgetController::BudgetController(const ControllerConfig& config,
                                   const Weights& weights,
                                   const Thresholds& thresholds,
                                   const BudgetState& initial,
                                   DeviationMode deviation)
    : config_(config),
      weights_(weights),
      thresholds_(thresholds),
      deviation_(deviation),
      budgets_(initial) {
  config_.validate();
  thresholds_.validate();
}

BudgetController::Step BudgetController::observe(double plasticity,
                                                  double stability,
                                                  double latency_s,
                                                  double memory_peak_mb) {
  MetricSnapshot snap;
  snap.plasticity = plasticity;
  snap.stability = stability;
  snap.latency_s = latency_s;
  snap.memory_peak_mb = memory_peak_mb;
  snap.thresholds = thresholds_;

  Step step;
  step.score = compute_urge(snap, weights_, deviation_);
  step.applied_score =
      budgets_.t == 0 ? config_.initial_health_score : step.score.value;
  step.threshold = threshold_at(config_, static_cast<double>(budgets_.t));
  try {
    step.budgets =
        update_budgets(budgets_, step.applied_score, step.threshold, config_);
  } catch (const InfeasibleBudgetError&) {
    if (step.applied_score < step.threshold) throw;
    // MO_advanced does not fit next to the knob floors: stay on the default
    // optimizer and keep the aggressive batch/replay growth.
    step.budgets = update_budgets(budgets_, step.applied_score, step.threshold,
                                  config_, /*allow_advanced=*/false);
    step.advanced_blocked = true;
  }
  budgets_ = step.budgets;
  return step;
}

}  // namespace oclmem
