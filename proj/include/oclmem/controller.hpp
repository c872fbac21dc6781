// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

#include "oclmem/metrics.hpp"
#include "oclmem/urge.hpp"

namespace oclmem {

enum class OptimizerMode { kDefault, kAdvanced };

std::string_view to_string(OptimizerMode m);
OptimizerMode parse_optimizer_mode(std::string_view s);

struct ControllerConfig {
  double initial_threshold = 0.07;    // Theta_0, in (0, 1)
  double decay_rate = 0.0;            // delta, per experience
  double batch_sensitivity = 0.0;     // alpha
  double replay_sensitivity = 0.0;    // beta
  double batch_sample_mb = 1.0;       // M_batch
  double replay_frame_mb = 1.0;       // M_df
  double optimizer_default_mb = 1.0;  // MO_default
  double optimizer_ratio = 1.0;       // k: MO_advanced = k * MO_default
  double capacity_mb = 2.0;
  double safety_margin = 0.05;
  std::int64_t min_batch = 1;
  std::int64_t min_buffer = 1;
  // Score assumed for the first budget update (HS_0).
  double initial_health_score = 1.0;

  void validate() const;

  double optimizer_advanced_mb() const noexcept {
    return optimizer_ratio * optimizer_default_mb;
  }
  /// capacity * (1 - safety_margin): the most MB + MR + MO may ever total.
  double budget_cap_mb() const noexcept {
    return capacity_mb * (1.0 - safety_margin);
  }
  double batch_floor_mb() const noexcept {
    return static_cast<double>(min_batch) * batch_sample_mb;
  }
  double replay_floor_mb() const noexcept {
    return static_cast<double>(min_buffer) * replay_frame_mb;
  }
  double optimizer_mb(OptimizerMode m) const noexcept {
    return m == OptimizerMode::kAdvanced ? optimizer_advanced_mb()
                                         : optimizer_default_mb;
  }
};

/// Memory budgets in MB plus the experience counter.
struct BudgetState {
  double batch_mb = 0.0;
  double replay_mb = 0.0;
  double optimizer_mb = 0.0;
  std::int64_t t = 0;

  double total_mb() const noexcept { return batch_mb + replay_mb + optimizer_mb; }
  friend bool operator==(const BudgetState&, const BudgetState&) = default;
};

struct Knobs {
  std::int64_t batch_size = 1;
  std::int64_t buffer_size = 1;
  OptimizerMode optimizer = OptimizerMode::kDefault;

  friend bool operator==(const Knobs&, const Knobs&) = default;
};

/// Theta_t = Theta_0 * exp(-delta * t).
double threshold_at(const ControllerConfig& config, double t);

/// Budgets for experience 0 from initial knob values; projected under the cap
/// if they do not fit.
BudgetState initial_budgets(const ControllerConfig& config,
                            std::int64_t batch_size, std::int64_t buffer_size,
                            OptimizerMode mode = OptimizerMode::kDefault);

/// One budget update. score >= threshold grows MB and MR by 1 + k*(score -
/// threshold) and selects the advanced optimizer; otherwise both shrink by
/// 1 - k*(threshold - score) (never below the knob floors) and the default
/// optimizer is selected. If the total then exceeds the cap, MB and MR are
/// scaled proportionally so the total meets it exactly; MO is never scaled.
///
/// With `allow_advanced` false the optimizer budget stays at MO_default even
/// on the aggressive branch. Throws InfeasibleBudgetError when MO plus the
/// knob floors do not fit under the cap.
BudgetState update_budgets(const BudgetState& prev, double score,
                           double threshold, const ControllerConfig& config,
                           bool allow_advanced = true);

BudgetState update_budgets(const BudgetState& prev, const UrgeScore& score,
                           double threshold, const ControllerConfig& config);

/// B = floor(MB / M_batch), R = floor(MR / M_df), floored at the minimums.
Knobs derive_knobs(const BudgetState& state, const ControllerConfig& config);

/// The per-experience decision maker: owns budgets, weights and thresholds,
/// turns a metric snapshot into the next budget state.
class BudgetController {
 public:
  struct Step {
    UrgeScore score;
    double applied_score = 0.0;  // score used for the update (HS_0 at t = 0)
    double threshold = 0.0;
    BudgetState budgets;
    bool advanced_blocked = false;  // aggressive branch fell back to default
  };

  BudgetController(const ControllerConfig& config, const Weights& weights,
                   const Thresholds& thresholds, const BudgetState& initial,
                   DeviationMode deviation = DeviationMode::kNormalized);

  Knobs knobs() const { return derive_knobs(budgets_, config_); }
  const BudgetState& budgets() const noexcept { return budgets_; }
  const ControllerConfig& config() const noexcept { return config_; }
  const Thresholds& thresholds() const noexcept { return thresholds_; }

  /// Scores the just-finished experience and moves to the next budgets.
  Step observe(double plasticity, double stability, double latency_s,
               double memory_peak_mb);

 private:
  ControllerConfig config_;
  Weights weights_;
  Thresholds thresholds_;
  DeviationMode deviation_;
  BudgetState budgets_;
};

}  // namespace oclmem
