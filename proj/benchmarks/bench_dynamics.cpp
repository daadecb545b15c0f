#include <benchmark/benchmark.h>

#include "odescm/builtins.hpp"
#include "odescm/flow.hpp"
#include "odescm/integrator.hpp"
#include "odescm/stability.hpp"

using namespace odescm;

static void BM_IntegrateLotkaVolterra(benchmark::State& state) {
  const OdeSystem sys(builtin_lotka_volterra());
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, sys.initial_state(), 50.0));
}
BENCHMARK(BM_IntegrateLotkaVolterra)->Unit(benchmark::kMillisecond);

static void BM_FlowMassSpring(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  std::vector<double> x0(sys.initial_state().begin(), sys.initial_state().end());
  x0[0] += 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(find_equilibrium_by_flow(sys, x0));
}
BENCHMARK(BM_FlowMassSpring)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_ProbeStability(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(4)));
  ProbeOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(probe_stability(sys, o));
}
BENCHMARK(BM_ProbeStability)->Unit(benchmark::kMillisecond);
