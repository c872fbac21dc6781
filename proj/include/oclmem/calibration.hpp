// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oclmem/simulator.hpp"

namespace oclmem {

struct BatchTarget {
  std::int64_t batch_size = 0;
  double latency_s = 0.0;  // whole run
  double memory_mb = 0.0;
};

struct BufferTarget {
  std::int64_t buffer_size = 0;
  double stability = 0.0;
  double memory_mb = 0.0;
};

/// Cost of the advanced optimizer plugins measured on one configuration.
/// When batch_size is set the default-mode point also joins the batch sweep.
struct PluginTarget {
  double latency_default_s = 0.0;
  double latency_advanced_s = 0.0;
  double memory_default_mb = 0.0;
  double memory_advanced_mb = 0.0;
  std::optional<std::int64_t> batch_size;
};

struct CalibrationTargets {
  std::string name = "custom";
  std::int64_t samples_total = 0;  // samples processed by each measured run
  std::int64_t sweep_buffer = 0;   // buffer size held fixed in the batch sweep
  std::int64_t sweep_batch = 0;    // batch size held fixed in the buffer sweep
  double spike_threshold = 1e4;
  std::vector<BatchTarget> batch_sweep;    // >= 3 points
  std::vector<BufferTarget> buffer_sweep;  // >= 3 points
  PluginTarget plugin;
  double max_relative_residual = 0.2;
};

CalibrationTargets load_calibration_targets(const std::filesystem::path& path);

struct Residual {
  std::string what;
  double target = 0.0;
  double fitted = 0.0;
  double relative() const;
};

struct CalibrationResult {
  AlgorithmProfile profile;
  ResponseModel response;
  std::int64_t samples_total = 0;
  std::int64_t sweep_buffer = 0;
  std::vector<Residual> residuals;

  double max_relative_residual() const;
  /// Whole-run latency of the measured workload at batch B.
  double latency(std::int64_t batch, OptimizerMode mode) const;
  double memory(std::int64_t batch, std::int64_t buffer, OptimizerMode mode) const;
};

/// Least-squares fit of the latency, memory and stability responses plus the
/// plugin costs. Latency: log-space fit of cost and knee. Memory: linear fit
/// of base, per-sample, per-frame and spike terms. Stability: saturating
/// exponential. Fields the targets do not cover keep the values of `prior`.
///
/// Throws CalibrationError for too few points, targets that break the
/// monotone shapes (latency must fall with B and not be constant, memory must
/// rise with B and R, stability must not fall with R), or a fitted relative
/// residual above targets.max_relative_residual.
CalibrationResult calibrate_profile(const CalibrationTargets& targets,
                                    const ResponseModel& prior = {});

}  // namespace oclmem
