// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "oclmem/controller.hpp"
#include "oclmem/metrics.hpp"
#include "oclmem/simulator.hpp"
#include "oclmem/urge.hpp"

namespace oclmem {

inline constexpr int kSchemaVersion = 1;

struct PlatformPreset {
  std::string name;
  double capacity_mb = 0.0;
  double compute_scale = 1.0;
  double load_time_per_sample = 0.0;  // seconds
};

/// Ranking of the four metrics, or balanced (equal weights) when empty.
struct Preference {
  std::string label = "balanced";
  std::vector<Metric> order;

  Weights weights() const;
};

/// Accepts "balanced", "prefer-latency", "prefer-ps", or a comma-separated
/// ranking such as "memory,plasticity,stability,latency".
Preference parse_preference(std::string_view text);

struct BaselinePreset {
  std::int64_t batch_size = 32;
  std::int64_t buffer_size = 1000;
  OptimizerMode optimizer = OptimizerMode::kDefault;
};

struct AlgorithmEntry {
  AlgorithmProfile profile;
  ResponseModel response;
};

struct ProfileLibrary {
  std::map<std::string, PlatformPreset> platforms;
  std::map<std::string, AlgorithmEntry> algorithms;
};

ProfileLibrary load_profile_library(const std::filesystem::path& path);

struct ScenarioConfig {
  std::string name;
  std::int64_t num_experiences = 1;
  std::int64_t samples_per_experience = 1;
  PlatformPreset platform;
  AlgorithmProfile profile;
  ResponseModel response;
  // Fully resolved: M_batch, M_df, MO_default, k and capacity are filled in.
  ControllerConfig controller;
  std::int64_t initial_batch = 32;
  std::int64_t initial_buffer = 1000;
  Thresholds thresholds;
  DeviationMode deviation = DeviationMode::kNormalized;
  Preference preference;
  PrefetchModel prefetch;
  BaselinePreset max_a{32, 1000, OptimizerMode::kAdvanced};
  BaselinePreset max_p{1024, 10, OptimizerMode::kDefault};
  BaselinePreset fixed{32, 1000, OptimizerMode::kDefault};
  OptimizerMode oracle_optimizer = OptimizerMode::kDefault;
  std::uint64_t seed = 0;

  void validate() const;
  EnvironmentSpec environment() const;
};

/// Controller constants the scenario leaves unset, measured on the
/// simulator: M_batch and M_df from the response model, MO_default and k
/// from probe steps at the scenario horizon.
struct ControllerOverrides {
  double batch_sample_mb = 0.0;  // 0 = derive
  double replay_frame_mb = 0.0;
  double optimizer_default_mb = 0.0;
  double optimizer_ratio = 0.0;
};
void resolve_controller(ScenarioConfig& scenario,
                        const ControllerOverrides& overrides = {});

/// Parses and validates a scenario file. The profile library path inside the
/// file is resolved relative to the scenario file. Throws ConfigError naming
/// the offending key path.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace oclmem
