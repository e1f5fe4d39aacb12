#include "romfbk/controller.hpp"
#include "romfbk/dataset.hpp"
#include "romfbk/training.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace romfbk;

// Timings do not depend on the weights, so an untrained model on a cheap
// dataset is enough.
const ControllerModel& bench_model() {
  static const ControllerModel model = [] {
    GenerationConfig gen;
    gen.num_scenarios = 4;
    gen.ocp.max_iters = 5;
    gen.threads = 1;
    const SnapshotSet data = generate_dataset(gen);
    ReductionConfig r;
    r.state_kind = ReducerKind::pod;
    r.control_kind = ReducerKind::pod;
    r.state_modes = 10;
    r.control_modes_per_component = 10;
    r.state_latent = 10;
    r.control_latent = 20;
    return initialize_model(data, r, true, 1);
  }();
  return model;
}

const Eigen::Vector2d kMu(0.25, 0.1);

void BM_PolicyAct(benchmark::State& state) {
  const ControllerModel& m = bench_model();
  const StateField y = gaussian_density(m.grid, {-0.3, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(policy_act(m, y, kMu));
}
BENCHMARK(BM_PolicyAct)->Unit(benchmark::kMicrosecond);

void BM_FullOrderLoop(benchmark::State& state) {
  const ControllerModel& m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(run_full_order_loop(m, {-0.3, 0.0}, kMu, m.fom));
}
BENCHMARK(BM_FullOrderLoop)->Unit(benchmark::kMillisecond);

void BM_LatentLoop(benchmark::State& state) {
  const ControllerModel& m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(run_latent_loop(m, {-0.3, 0.0}, kMu, std::nullopt));
}
BENCHMARK(BM_LatentLoop)->Unit(benchmark::kMillisecond);

}  // namespace
