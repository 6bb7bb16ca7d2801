#include <gridshield/experiment.hpp>
#include <gridshield/gic.hpp>
#include <gridshield/gmgic.hpp>
#include <gridshield/omp.hpp>

#include <benchmark/benchmark.h>

#include <string>

using namespace gridshield;

namespace {

const Workbench& ieee30() {
  static const Workbench wb(load_case_file(std::string(GRIDSHIELD_DATA_DIR) + "/case30.m"));
  return wb;
}

// One attacked trial per K_a, fixed across methods.
TrialData trial_for(int k_a) {
  const ScenarioPoint point{k_a, 1.2, 0.05, 0.01, std::nullopt};
  return simulate_trial(ieee30(), point, true, 1, static_cast<std::uint64_t>(k_a), Stream::trial);
}

void BM_Gic(benchmark::State& state) {
  const auto& wb = ieee30();
  const CandidateFamily family(wb.topo.restricted_states(), 6);
  const auto d = trial_for(static_cast<int>(state.range(0)));
  const PenaltyConfig pen{2.0, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(gic_select(wb.topo.load_block(), d.dz_L, family, pen, 0.01));
}

void BM_Omp(benchmark::State& state) {
  const auto& wb = ieee30();
  const auto d = trial_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(omp_identify(wb.topo, d.dz_L, OmpConfig{6, 0.05}));
}

void BM_GmGic(benchmark::State& state) {
  const auto& wb = ieee30();
  const auto d = trial_for(static_cast<int>(state.range(0)));
  GmGicConfig cfg;
  cfg.rho = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(gm_gic(wb.topo, d.dz_L, cfg, 0.01));
}

void BM_Prescreen(benchmark::State& state) {
  const auto& dict = ieee30().topo.dictionary();
  const auto d = trial_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(prescreen(dict, d.dz_L, 0.05));
}

}  // namespace

BENCHMARK(BM_Gic)->DenseRange(1, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Omp)->DenseRange(1, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GmGic)->DenseRange(1, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Prescreen)->DenseRange(1, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
