// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "oclmem/controller.hpp"

namespace oclmem {

enum class RecordStatus { kOk, kOom };
enum class RunOutcome { kCompleted, kOomFailed };

std::string_view to_string(RecordStatus s);
std::string_view to_string(RunOutcome o);

/// One experience of one run. On OOM the score, threshold, plasticity and
/// stability are NaN: training never finished, so nothing was scored.
struct TraceRecord {
  std::int64_t experience = 0;  // 1-based
  Knobs knobs;
  double score = 0.0;
  double applied_score = 0.0;
  double threshold = 0.0;
  double latency_s = 0.0;
  double memory_peak_mb = 0.0;
  double plasticity = 0.0;
  double stability = 0.0;
  BudgetState budgets;  // state after this experience's update
  RecordStatus status = RecordStatus::kOk;
};

struct RunTrace {
  std::string scenario;
  std::string policy;
  std::int64_t planned_experiences = 0;
  std::vector<TraceRecord> records;
  RunOutcome outcome = RunOutcome::kCompleted;

  double total_latency_s() const;
  double peak_memory_mb() const;
  /// Metrics of the last completed experience; NaN if none completed.
  double final_plasticity() const;
  double final_stability() const;
  std::size_t completed_experiences() const;
};

/// Bitwise comparison (NaN equal to NaN) of every record field.
bool identical(const RunTrace& a, const RunTrace& b);

}  // namespace oclmem
