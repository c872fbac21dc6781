// SPDX-License-Identifier: Apache-2.0
#include "oclmem/baselines.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <tuple>

#include "oclmem/control_loop.hpp"

namespace oclmem {

namespace {

const BaselinePreset& preset(BaselineKind kind, const ScenarioConfig& sc) {
  switch (kind) {
    case BaselineKind::kMaxA: return sc.max_a;
    case BaselineKind::kMaxP: return sc.max_p;
    case BaselineKind::kFixed: return sc.fixed;
  }
  return sc.fixed;
}

RunTrace run_point(const ScenarioConfig& sc, const GridPoint& p) {
  return run_fixed(sc, {p.batch_size, p.buffer_size, sc.oracle_optimizer},
                   oracle_policy_name(p));
}

}  // namespace

std::string_view policy_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kMaxA: return "max_a";
    case BaselineKind::kMaxP: return "max_p";
    case BaselineKind::kFixed: return "fixed-proxy";
  }
  return "?";
}

RunTrace run_fixed(const ScenarioConfig& scenario, const Knobs& knobs,
                   const std::string& policy) {
  SimulatedEnvironment env(scenario.environment());
  FixedPolicy fixed(scenario, knobs);
  return run_loop(scenario, env, fixed, policy);
}

RunTrace run_baseline(BaselineKind kind, const ScenarioConfig& scenario) {
  const auto& b = preset(kind, scenario);
  return run_fixed(scenario, {b.batch_size, b.buffer_size, b.optimizer},
                   std::string(policy_name(kind)));
}

std::vector<GridPoint> oracle_grid() {
  std::vector<GridPoint> grid;
  grid.reserve(kOracleBatches.size() * kOracleBuffers.size());
  for (auto b : kOracleBatches) {
    for (auto r : kOracleBuffers) grid.push_back({b, r});
  }
  return grid;
}

std::string oracle_policy_name(const GridPoint& p) {
  return "oracle:b=" + std::to_string(p.batch_size) +
         ":r=" + std::to_string(p.buffer_size);
}

double oracle_objective(const RunTrace& trace) {
  if (trace.outcome != RunOutcome::kCompleted) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return 0.5 * (trace.final_plasticity() + trace.final_stability());
}

std::size_t OracleResult::oom_count() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.outcome == RunOutcome::kOomFailed;
  return n;
}

std::optional<std::size_t> select_best(std::span<const GridPoint> grid,
                                       std::span<const RunTrace> traces) {
  std::optional<std::size_t> best;
  // Lexicographic: objective high, latency low, batch low, buffer low.
  auto key = [&](std::size_t i) {
    return std::make_tuple(-oracle_objective(traces[i]),
                           traces[i].total_latency_s(), grid[i].batch_size,
                           grid[i].buffer_size);
  };
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (std::isnan(oracle_objective(traces[i]))) continue;
    if (!best || key(i) < key(*best)) best = i;
  }
  return best;
}

OracleResult run_oracle(const ScenarioConfig& scenario,
                        std::span<const GridPoint> grid, Execution exec) {
  OracleResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.traces.resize(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());

  if (exec == Execution::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      result.traces[i] = run_point(scenario, grid[i]);
    }
  } else {
    std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        result.traces[i] = run_point(scenario, grid[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  result.best = select_best(result.grid, result.traces);
  return result;
}

OracleResult run_oracle(const ScenarioConfig& scenario, Execution exec) {
  const auto grid = oracle_grid();
  return run_oracle(scenario, grid, exec);
}

}  // namespace oclmem
