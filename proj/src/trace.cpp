// SPDX-License-Identifier: Apache-2.0
#include "oclmem/trace.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace oclmem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const TraceRecord* last_ok(const RunTrace& t) {
  for (auto it = t.records.rbegin(); it != t.records.rend(); ++it) {
    if (it->status == RecordStatus::kOk) return &*it;
  }
  return nullptr;
}

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

std::string_view to_string(RecordStatus s) {
  return s == RecordStatus::kOom ? "oom" : "ok";
}

std::string_view to_string(RunOutcome o) {
  return o == RunOutcome::kOomFailed ? "oom_failed" : "completed";
}

double RunTrace::total_latency_s() const {
  double sum = 0.0;
  for (const auto& r : records) sum += r.latency_s;
  return sum;
}

double RunTrace::peak_memory_mb() const {
  double peak = 0.0;
  for (const auto& r : records) peak = std::max(peak, r.memory_peak_mb);
  return peak;
}

double RunTrace::final_plasticity() const {
  const auto* r = last_ok(*this);
  return r ? r->plasticity : kNaN;
}

double RunTrace::final_stability() const {
  const auto* r = last_ok(*this);
  return r ? r->stability : kNaN;
}

std::size_t RunTrace::completed_experiences() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [](const auto& r) { return r.status == RecordStatus::kOk; }));
}

bool identical(const RunTrace& a, const RunTrace& b) {
  if (a.scenario != b.scenario || a.policy != b.policy ||
      a.planned_experiences != b.planned_experiences ||
      a.outcome != b.outcome || a.records.size() != b.records.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    const double xs[] = {x.score,         x.applied_score,  x.threshold,
                         x.latency_s,     x.memory_peak_mb, x.plasticity,
                         x.stability,     x.budgets.batch_mb,
                         x.budgets.replay_mb, x.budgets.optimizer_mb};
    const double ys[] = {y.score,         y.applied_score,  y.threshold,
                         y.latency_s,     y.memory_peak_mb, y.plasticity,
                         y.stability,     y.budgets.batch_mb,
                         y.budgets.replay_mb, y.budgets.optimizer_mb};
    for (std::size_t j = 0; j < std::size(xs); ++j) {
      if (!same_bits(xs[j], ys[j])) return false;
    }
    if (x.experience != y.experience || !(x.knobs == y.knobs) ||
        x.budgets.t != y.budgets.t || x.status != y.status) {
      return false;
    }
  }
  return true;
}

}  // namespace oclmem
