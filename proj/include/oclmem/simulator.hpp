// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "oclmem/controller.hpp"
#include "oclmem/metrics.hpp"

namespace oclmem {

/// Cost signature of one continual-learning algorithm (ER, GSS, GEM, AGEM or
/// a custom entry). Times are seconds on a platform with compute_scale 1.
struct AlgorithmProfile {
  std::string name;
  double compute_cost_per_sample = 0.0;
  double replay_sampling_cost = 0.0;    // per buffer slot, per experience
  double optimizer_latency_multiplier = 1.0;  // advanced optimizer
  double optimizer_memory_delta = 0.0;        // MB added by advanced plugins
  double optimizer_memory_growth = 0.0;  // MB per experience the plugins keep
  double base_memory = 0.0;              // model + framework, MB
  double per_experience_growth = 1.0;    // latency drift per experience

  void validate() const;
};

/// Functional forms mapping knobs to latency, memory and accuracy.
struct ResponseModel {
  // Latency: iteration time is flat below the knee, linear in B above it.
  double batch_knee = 256.0;
  // Memory.
  double activation_mb = 1.0;  // per batch sample
  double frame_mb = 0.05;      // per replay slot
  double spike_threshold = 1e4;
  double spike_coefficient = 0.0;  // MB per slot^2 above the threshold
  // Stability gain s(R) = stability_max * (1 - exp(-R / stability_scale)).
  double stability_max = 1.0;
  double stability_scale = 1000.0;
  // Diagonal accuracy: plasticity_max * (1 - exp(-(n / B) / plasticity_steps))
  // plus a bonus with the advanced optimizer.
  double plasticity_max = 0.9;
  double plasticity_steps = 20.0;
  double advanced_plasticity_bonus = 0.0;
  // Off-diagonal accuracies shrink by forgetting_rate * (1 - s(R)) each
  // experience, times advanced_forgetting_scale with the advanced optimizer.
  double forgetting_rate = 0.1;
  double advanced_forgetting_scale = 1.0;
  // Relative jitter applied to new diagonal accuracies; 0 is deterministic.
  double noise = 0.0;

  void validate() const;

  double stability_gain(std::int64_t buffer) const;
  double diagonal_accuracy(std::int64_t batch, OptimizerMode mode,
                           std::int64_t samples) const;
  double spike_mb(std::int64_t buffer) const;

  /// Full-buffer peak memory at experience e (1-based).
  double peak_memory(const AlgorithmProfile& profile, std::int64_t batch,
                     std::int64_t buffer, OptimizerMode mode,
                     std::size_t experience = 1) const;

  /// Compute time for one experience of `samples` samples.
  double compute_latency(const AlgorithmProfile& profile, std::int64_t batch,
                         std::int64_t buffer, OptimizerMode mode,
                         std::size_t experience, std::int64_t samples,
                         double compute_scale = 1.0) const;
};

/// Overlap of data loading with compute. With the prefetch in effect the
/// latency is compute + max(0, load - overlap_efficiency * compute);
/// otherwise compute + load.
struct PrefetchModel {
  double load_time_per_sample = 0.0;
  double overlap_efficiency = 1.0;
  bool enabled = true;

  void validate() const;
  double latency(double compute_s, double load_s, bool overlapped) const;
};

struct TrainResult {
  double latency_s = 0.0;
  double compute_s = 0.0;
  double load_s = 0.0;
  double memory_peak_mb = 0.0;
  bool oom = false;
  std::vector<double> accuracy_row;  // empty on OOM
};

/// Latency and memory of one experience without touching any state.
struct Probe {
  double compute_s = 0.0;
  double load_s = 0.0;
  double memory_peak_mb = 0.0;
};

struct EnvironmentSpec {
  AlgorithmProfile profile;
  ResponseModel response;
  double capacity_mb = 0.0;
  double compute_scale = 1.0;
  PrefetchModel prefetch;
  std::int64_t samples_per_experience = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic stand-in for on-device training. Single owner; train
/// experiences strictly in order 1, 2, ...
class SimulatedEnvironment {
 public:
  explicit SimulatedEnvironment(EnvironmentSpec spec);

  /// Trains experience e with the given knobs. memory_peak > capacity is an
  /// OOM: the result carries oom = true and the environment enters the failed
  /// state.
  TrainResult train_experience(std::size_t e, const Knobs& knobs);

  /// Stages data for experience e so its loading overlaps compute.
  void prefetch_next(std::size_t e);

  Probe probe(std::size_t e, const Knobs& knobs) const;

  const AccuracyMatrix& accuracy() const noexcept { return matrix_; }
  const EnvironmentSpec& spec() const noexcept { return spec_; }
  bool failed() const noexcept { return failed_; }
  std::size_t next_experience() const noexcept { return next_; }

 private:
  double jitter(std::size_t e) const;

  EnvironmentSpec spec_;
  AccuracyMatrix matrix_;
  std::size_t next_ = 1;
  std::size_t prefetched_ = 0;
  bool failed_ = false;
};

/// k = MO_advanced / MO_default from two probe steps (one per optimizer mode)
/// at experience `horizon`, attributing everything except B * M_batch and
/// R * M_df to the optimizer.
double estimate_optimizer_ratio(const SimulatedEnvironment& env,
                                std::size_t horizon);

/// Unprofiled memory (MO_default) measured by a default-mode probe.
double estimate_optimizer_default_mb(const SimulatedEnvironment& env);

}  // namespace oclmem
