#include "romfbk/fom.hpp"
#include "romfbk/ocp.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace romfbk;

void BM_Step(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const FomConfig fom;
  const StateField y = gaussian_density(g, {-0.3, 0.1});
  const ControlField u(g, Eigen::VectorXd::Constant(g.size(), 0.4), Eigen::VectorXd::Constant(g.size(), -0.2));
  const ControlField v = ControlField::zeros(g);
  for (auto _ : state) benchmark::DoNotOptimize(step(y, u, v, fom));
}
BENCHMARK(BM_Step)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_CostAndGradient(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const FomConfig fom;
  const OcpConfig ocp;
  const Scenario sc{{0.3, 0.2}, std::nullopt};
  const StateField y0 = gaussian_density(g, {-0.3, -0.1});
  const StateField yd = gaussian_density(g, sc.target);
  const std::vector<ControlField> u(fom.steps, ControlField(g, Eigen::VectorXd::Constant(g.size(), 0.2),
                                                            Eigen::VectorXd::Zero(g.size())));
  for (auto _ : state) benchmark::DoNotOptimize(cost_and_gradient(u, y0, sc, fom, ocp, yd));
}
BENCHMARK(BM_CostAndGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
