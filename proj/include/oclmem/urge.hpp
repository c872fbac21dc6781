// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "oclmem/metrics.hpp"

namespace oclmem {

enum class Metric { kMemory, kPlasticity, kStability, kLatency };

inline constexpr std::array<Metric, 4> kAllMetrics = {
    Metric::kMemory, Metric::kPlasticity, Metric::kStability, Metric::kLatency};

std::string_view to_string(Metric m);

/// Accepts "memory", "plasticity", "stability", "latency" (case-insensitive).
Metric parse_metric(std::string_view name);

/// Normalized sensitivities of the health score, one per metric.
struct Weights {
  double plasticity = 0.0;
  double stability = 0.0;
  double latency = 0.0;
  double memory = 0.0;

  double sum() const noexcept { return plasticity + stability + latency + memory; }
  double& operator[](Metric m);
  double operator[](Metric m) const;
};

/// Positional rule: with n metrics ranked from most to least important,
/// position p (1-based) gets raw weight n + 1 - p, then weights are
/// normalized to sum to 1. Throws InvalidPreferenceError unless `order` is a
/// permutation of all four metrics.
Weights weights_from_preference(std::span<const Metric> order);

/// Equal importance for every metric (0.25 each).
Weights balanced_weights();

struct UrgeScore {
  double value = 0.0;
  // Logistic factors in the order plasticity, stability, latency, memory.
  std::array<double, 4> components{};
};

enum class DeviationMode {
  // (X - X_th) / max(|X_th|, eps): every factor works on a unitless scale.
  kNormalized,
  // X - X_th in the metric's native unit.
  kRaw,
};

/// Health score: product of four logistic factors. High plasticity, high
/// stability and high memory each lower the score; high latency raises it.
/// Each factor is kept strictly inside (0, 1) so the product never saturates
/// to exactly 0 or 1.
UrgeScore compute_urge(const MetricSnapshot& snapshot, const Weights& weights,
                       DeviationMode mode = DeviationMode::kNormalized);

}  // namespace oclmem
