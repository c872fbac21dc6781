// SPDX-License-Identifier: Apache-2.0
// Oracle sweep: serial reference against the OpenMP kernel.
#include <benchmark/benchmark.h>

#include <cstdlib>
#include <string>

#include "oclmem/baselines.hpp"
#include "oclmem/scenario.hpp"

namespace {

const oclmem::ScenarioConfig& scenario() {
  static const oclmem::ScenarioConfig sc = [] {
    const char* path = std::getenv("OCLMEM_BENCH_SCENARIO");
    return oclmem::load_scenario(path ? path
                                      : OCLMEM_DATA_DIR "/scenarios/xavier-gss.json");
  }();
  return sc;
}

void BM_OracleSerial(benchmark::State& state) {
  for (auto _ : state) {
    auto r = oclmem::run_oracle(scenario(), oclmem::Execution::kSerial);
    benchmark::DoNotOptimize(r.best);
  }
}
BENCHMARK(BM_OracleSerial)->Unit(benchmark::kMillisecond);

void BM_OracleParallel(benchmark::State& state) {
  for (auto _ : state) {
    auto r = oclmem::run_oracle(scenario(), oclmem::Execution::kParallel);
    benchmark::DoNotOptimize(r.best);
  }
}
BENCHMARK(BM_OracleParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
