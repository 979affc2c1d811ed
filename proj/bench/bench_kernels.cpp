// Serial reference kernels against their OpenMP counterparts.
//   mekan_bench --benchmark_filter=Forward

#include "mekan/gradient.hpp"
#include "mekan/network.hpp"
#include "mekan/parallel.hpp"

#include <benchmark/benchmark.h>

using namespace mekan;

namespace {

struct Workload {
  MultiExitKan model;
  Matrix x, y;
  LossSpec spec;
};

Workload make_workload(int rows) {
  BuildOptions o;
  o.grid_size = 10;
  o.seed = 1;
  Workload w{build({{4, 5, 5, 5, 5, 1}}, true, o), Matrix::Random(rows, 4), Matrix::Random(rows, 1), {}};
  w.spec.exit_weights = ExitWeights::fixed({0, 0, 1, 1, 1.5});
  return w;
}

void BM_ForwardSerial(benchmark::State& state) {
  const Workload w = make_workload(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_serial(w.model, w.x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardParallel(benchmark::State& state) {
  const Workload w = make_workload(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(w.model, w.x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossAndGradSerial(benchmark::State& state) {
  const Workload w = make_workload(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad_serial(w.model, w.x, w.y, w.spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossAndGradParallel(benchmark::State& state) {
  const Workload w = make_workload(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(w.model, w.x, w.y, w.spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ForwardSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ForwardParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_LossAndGradSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_LossAndGradParallel)->Arg(1000)->Arg(10000);

int main(int argc, char** argv) {
  set_num_threads(resolve_thread_count(std::nullopt));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::AddCustomContext("threads", std::to_string(max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
