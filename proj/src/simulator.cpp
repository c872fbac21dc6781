// SPDX-License-Identifier: Apache-2.0
#include "oclmem/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void AlgorithmProfile::validate() const {
  const std::string p = "profile '" + name + "': ";
  require(!name.empty(), "profile name must not be empty");
  require(finite_nonneg(compute_cost_per_sample) && compute_cost_per_sample > 0,
          p + "compute_cost_per_sample must be positive");
  require(finite_nonneg(replay_sampling_cost),
          p + "replay_sampling_cost must be >= 0");
  require(std::isfinite(optimizer_latency_multiplier) &&
              optimizer_latency_multiplier >= 1.0,
          p + "optimizer_latency_multiplier must be >= 1");
  require(finite_nonneg(optimizer_memory_delta),
          p + "optimizer_memory_delta must be >= 0");
  require(finite_nonneg(optimizer_memory_growth),
          p + "optimizer_memory_growth must be >= 0");
  require(finite_nonneg(base_memory) && base_memory > 0,
          p + "base_memory must be positive");
  require(std::isfinite(per_experience_growth) && per_experience_growth >= 1.0,
          p + "per_experience_growth must be >= 1");
}

void ResponseModel::validate() const {
  require(std::isfinite(batch_knee) && batch_knee >= 1.0,
          "response: batch_knee must be >= 1");
  require(finite_nonneg(activation_mb) && activation_mb > 0,
          "response: activation_mb must be positive");
  require(finite_nonneg(frame_mb) && frame_mb > 0,
          "response: frame_mb must be positive");
  require(finite_nonneg(spike_threshold), "response: spike_threshold must be >= 0");
  require(finite_nonneg(spike_coefficient),
          "response: spike_coefficient must be >= 0");
  require(std::isfinite(stability_max) && stability_max >= 0 &&
              stability_max <= 1.0,
          "response: stability_max must lie in [0, 1]");
  require(std::isfinite(stability_scale) && stability_scale > 0,
          "response: stability_scale must be positive");
  require(std::isfinite(plasticity_max) && plasticity_max >= 0 &&
              plasticity_max <= 1.0,
          "response: plasticity_max must lie in [0, 1]");
  require(std::isfinite(plasticity_steps) && plasticity_steps > 0,
          "response: plasticity_steps must be positive");
  require(finite_nonneg(advanced_plasticity_bonus),
          "response: advanced_plasticity_bonus must be >= 0");
  require(std::isfinite(advanced_forgetting_scale) &&
              advanced_forgetting_scale >= 0 && advanced_forgetting_scale <= 1.0,
          "response: advanced_forgetting_scale must lie in [0, 1]");
  require(std::isfinite(forgetting_rate) && forgetting_rate >= 0 &&
              forgetting_rate <= 1.0,
          "response: forgetting_rate must lie in [0, 1]");
  require(std::isfinite(noise) && noise >= 0 && noise < 1.0,
          "response: noise must lie in [0, 1)");
}

double ResponseModel::stability_gain(std::int64_t buffer) const {
  if (buffer <= 0) return 0.0;
  return stability_max *
         -std::expm1(-static_cast<double>(buffer) / stability_scale);
}

double ResponseModel::diagonal_accuracy(std::int64_t batch, OptimizerMode mode,
                                        std::int64_t samples) const {
  const double steps =
      static_cast<double>(samples) / static_cast<double>(std::max<std::int64_t>(batch, 1));
  double p = plasticity_max * -std::expm1(-steps / plasticity_steps);
  if (mode == OptimizerMode::kAdvanced) p += advanced_plasticity_bonus;
  return std::clamp(p, 0.0, 1.0);
}

double ResponseModel::spike_mb(std::int64_t buffer) const {
  const double over = static_cast<double>(buffer) - spike_threshold;
  return over > 0.0 ? spike_coefficient * over * over : 0.0;
}

double ResponseModel::peak_memory(const AlgorithmProfile& profile,
                                  std::int64_t batch, std::int64_t buffer,
                                  OptimizerMode mode,
                                  std::size_t experience) const {
  double m = profile.base_memory + static_cast<double>(batch) * activation_mb +
             static_cast<double>(buffer) * frame_mb + spike_mb(buffer);
  if (mode == OptimizerMode::kAdvanced) {
    const double age = experience > 0 ? static_cast<double>(experience - 1) : 0.0;
    m += profile.optimizer_memory_delta + profile.optimizer_memory_growth * age;
  }
  return m;
}

double ResponseModel::compute_latency(const AlgorithmProfile& profile,
                                      std::int64_t batch, std::int64_t buffer,
                                      OptimizerMode mode,
                                      std::size_t experience,
                                      std::int64_t samples,
                                      double compute_scale) const {
  const double b = static_cast<double>(std::max<std::int64_t>(batch, 1));
  const double iterations = static_cast<double>(samples) / b;
  const double per_iteration =
      profile.compute_cost_per_sample * std::max(b, batch_knee);
  const double age = experience > 0 ? static_cast<double>(experience - 1) : 0.0;
  double t = iterations * per_iteration *
             std::pow(profile.per_experience_growth, age);
  if (mode == OptimizerMode::kAdvanced) t *= profile.optimizer_latency_multiplier;
  t += static_cast<double>(std::max<std::int64_t>(buffer, 0)) *
       profile.replay_sampling_cost;
  return t * compute_scale;
}

void PrefetchModel::validate() const {
  require(finite_nonneg(load_time_per_sample),
          "prefetch: load_time_per_sample must be >= 0");
  require(std::isfinite(overlap_efficiency) && overlap_efficiency >= 0 &&
              overlap_efficiency <= 1.0,
          "prefetch: overlap_efficiency must lie in [0, 1]");
}

double PrefetchModel::latency(double compute_s, double load_s,
                              bool overlapped) const {
  if (!overlapped) return compute_s + load_s;
  return compute_s + std::max(0.0, load_s - overlap_efficiency * compute_s);
}

void EnvironmentSpec::validate() const {
  profile.validate();
  response.validate();
  prefetch.validate();
  require(std::isfinite(capacity_mb) && capacity_mb > 0,
          "environment: capacity must be positive");
  require(std::isfinite(compute_scale) && compute_scale > 0,
          "environment: compute_scale must be positive");
  require(samples_per_experience >= 1,
          "environment: samples_per_experience must be >= 1");
}

SimulatedEnvironment::SimulatedEnvironment(EnvironmentSpec spec)
    : spec_(std::move(spec)) {
  spec_.validate();
}

Probe SimulatedEnvironment::probe(std::size_t e, const Knobs& knobs) const {
  Probe p;
  p.compute_s = spec_.response.compute_latency(
      spec_.profile, knobs.batch_size, knobs.buffer_size, knobs.optimizer, e,
      spec_.samples_per_experience, spec_.compute_scale);
  p.load_s = static_cast<double>(spec_.samples_per_experience) *
             spec_.prefetch.load_time_per_sample;
  p.memory_peak_mb = spec_.response.peak_memory(
      spec_.profile, knobs.batch_size, knobs.buffer_size, knobs.optimizer, e);
  return p;
}

double SimulatedEnvironment::jitter(std::size_t e) const {
  if (spec_.response.noise == 0.0) return 1.0;
  std::seed_seq seq{static_cast<std::uint32_t>(spec_.seed),
                    static_cast<std::uint32_t>(spec_.seed >> 32),
                    static_cast<std::uint32_t>(e)};
  std::mt19937_64 rng(seq);
  // Top 53 bits -> [0, 1); avoids distribution objects whose output differs
  // between standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 1.0 + spec_.response.noise * (2.0 * u - 1.0);
}

TrainResult SimulatedEnvironment::train_experience(std::size_t e,
                                                   const Knobs& knobs) {
  if (failed_) throw std::logic_error("environment failed earlier (OOM)");
  if (e != next_) {
    throw std::invalid_argument("expected experience " + std::to_string(next_) +
                                ", got " + std::to_string(e));
  }
  if (knobs.batch_size < 1 || knobs.buffer_size < 1) {
    throw std::invalid_argument("batch and buffer sizes must be >= 1");
  }

  const Probe p = probe(e, knobs);
  TrainResult r;
  r.compute_s = p.compute_s;
  r.load_s = p.load_s;
  r.memory_peak_mb = p.memory_peak_mb;
  const bool overlapped = spec_.prefetch.enabled && prefetched_ == e;
  r.latency_s = spec_.prefetch.latency(p.compute_s, p.load_s, overlapped);
  if (r.memory_peak_mb > spec_.capacity_mb) {
    r.oom = true;
    failed_ = true;
    return r;
  }

  const ResponseModel& rm = spec_.response;
  double decay = rm.forgetting_rate * (1.0 - rm.stability_gain(knobs.buffer_size));
  if (knobs.optimizer == OptimizerMode::kAdvanced) {
    decay *= rm.advanced_forgetting_scale;
  }
  r.accuracy_row.reserve(e);
  if (e > 1) {
    for (double prev : matrix_.row(e - 1)) {
      r.accuracy_row.push_back(prev * (1.0 - decay));
    }
  }
  const double diag = rm.diagonal_accuracy(knobs.batch_size, knobs.optimizer,
                                           spec_.samples_per_experience);
  r.accuracy_row.push_back(std::clamp(diag * jitter(e), 0.0, 1.0));
  matrix_.append_row(r.accuracy_row);
  ++next_;
  return r;
}

void SimulatedEnvironment::prefetch_next(std::size_t e) {
  if (failed_) throw std::logic_error("environment failed earlier (OOM)");
  prefetched_ = e;
}

double estimate_optimizer_default_mb(const SimulatedEnvironment& env) {
  const Knobs unit{1, 1, OptimizerMode::kDefault};
  const auto& rm = env.spec().response;
  return env.probe(1, unit).memory_peak_mb - rm.activation_mb - rm.frame_mb -
         rm.spike_mb(1);
}

double estimate_optimizer_ratio(const SimulatedEnvironment& env,
                                std::size_t horizon) {
  const auto& rm = env.spec().response;
  const double knob_mb = rm.activation_mb + rm.frame_mb + rm.spike_mb(1);
  const double def =
      env.probe(horizon, {1, 1, OptimizerMode::kDefault}).memory_peak_mb -
      knob_mb;
  const double adv =
      env.probe(horizon, {1, 1, OptimizerMode::kAdvanced}).memory_peak_mb -
      knob_mb;
  if (!(def > 0.0)) throw CalibrationError("default probe left no optimizer memory");
  return std::max(1.0, adv / def);
}

}  // namespace oclmem
