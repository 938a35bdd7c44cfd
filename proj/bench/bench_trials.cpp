// Throughput of the trial harness: OpenMP-parallel batches against the
// serial reference, plus single-run cost per protocol.

#include <benchmark/benchmark.h>

#include "rmis/analysis.hpp"

using namespace rmis;

namespace {

RunConfig make(const char* family, Protocol p) {
  RunConfig c;
  c.graph = std::make_shared<const Graph>(make_family(parse_family(family, 1)));
  c.protocol = p;
  return c;
}

const char* const kFamilies[] = {"cycle:128", "random_regular:128:3", "erdos_renyi:256:8/n"};

void BM_SingleRun(benchmark::State& state) {
  auto c = make(kFamilies[state.range(0)], state.range(1) ? Protocol::Rank : Protocol::Rps);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    c.master_seed = seed++;
    benchmark::DoNotOptimize(run(c));
  }
  state.SetLabel(std::string(kFamilies[state.range(0)]) + (state.range(1) ? " rank" : " rps"));
}
BENCHMARK(BM_SingleRun)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_TrialsSerial(benchmark::State& state) {
  auto c = make("erdos_renyi:256:8/n", state.range(0) ? Protocol::Rank : Protocol::Rps);
  for (auto _ : state) benchmark::DoNotOptimize(run_trials_serial(c, 256, 0));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TrialsSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrialsParallel(benchmark::State& state) {
  auto c = make("erdos_renyi:256:8/n", state.range(0) ? Protocol::Rank : Protocol::Rps);
  const int jobs = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c, 256, 0, jobs));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TrialsParallel)->ArgsProduct({{0, 1}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
