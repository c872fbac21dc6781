// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oclmem/scenario.hpp"
#include "oclmem/trace.hpp"

namespace oclmem {

enum class BaselineKind { kMaxA, kMaxP, kFixed };

/// "max_a", "max_p", "fixed-proxy".
std::string_view policy_name(BaselineKind kind);

/// Runs the scenario with the baseline's preset knobs for every experience.
/// OOM is a recorded outcome, not an error.
RunTrace run_baseline(BaselineKind kind, const ScenarioConfig& scenario);

RunTrace run_fixed(const ScenarioConfig& scenario, const Knobs& knobs,
                   const std::string& policy);

inline constexpr std::array<std::int64_t, 7> kOracleBatches = {
    16, 32, 64, 128, 256, 512, 1024};
inline constexpr std::array<std::int64_t, 6> kOracleBuffers = {
    10, 100, 1000, 10000, 100000, 1000000};

struct GridPoint {
  std::int64_t batch_size = 0;
  std::int64_t buffer_size = 0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Batch-major enumeration of the 7 x 6 grid.
std::vector<GridPoint> oracle_grid();

/// "oracle:b=<batch>:r=<buffer>".
std::string oracle_policy_name(const GridPoint& p);

/// Oracle objective for one run: mean of final plasticity and stability.
/// NaN for runs that did not complete.
double oracle_objective(const RunTrace& trace);

struct OracleResult {
  std::vector<GridPoint> grid;
  std::vector<RunTrace> traces;  // traces[i] ran grid[i]
  std::optional<std::size_t> best;  // index into grid; empty if all failed

  std::size_t oom_count() const;
  bool infeasible() const noexcept { return !best.has_value(); }
};

/// Highest objective among completed runs; ties go to lower total latency,
/// then smaller batch, then smaller buffer, so the choice does not depend on
/// the enumeration order.
std::optional<std::size_t> select_best(std::span<const GridPoint> grid,
                                       std::span<const RunTrace> traces);

enum class Execution { kSerial, kParallel };

/// Runs every grid point (optimizer fixed to scenario.oracle_optimizer).
/// kParallel spreads grid points over OpenMP threads; kSerial is the
/// reference implementation. Both produce identical results.
OracleResult run_oracle(const ScenarioConfig& scenario,
                        Execution exec = Execution::kParallel);
OracleResult run_oracle(const ScenarioConfig& scenario,
                        std::span<const GridPoint> grid, Execution exec);

}  // namespace oclmem
