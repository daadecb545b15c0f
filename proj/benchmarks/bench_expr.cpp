#include <benchmark/benchmark.h>

#include "odescm/builtins.hpp"
#include "odescm/ode_system.hpp"
#include "odescm/spectrum.hpp"

using namespace odescm;

static void BM_Drift(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const std::vector<double> x(sys.initial_state().begin(), sys.initial_state().end());
  std::vector<double> out(x.size());
  for (auto _ : state) {
    sys.drift(x, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Drift)->Arg(2)->Arg(8)->Arg(32);

static void BM_TreeEval(benchmark::State& state) {
  const ModelSpec spec = builtin_lotka_volterra();
  std::map<std::string, double> params;
  for (const auto& p : spec.layout.parameters) params[p.name] = p.value;
  const Valuation env = make_valuation({{"X1", 0.5}, {"X2", 0.5}}, params);
  for (auto _ : state) benchmark::DoNotOptimize(eval_expr(spec.dynamics[0], env));
}
BENCHMARK(BM_TreeEval);

static void BM_Jacobian(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const std::vector<double> x(sys.initial_state().begin(), sys.initial_state().end());
  for (auto _ : state) benchmark::DoNotOptimize(sys.jacobian(x));
}
BENCHMARK(BM_Jacobian)->Arg(2)->Arg(8);

static void BM_Eigenvalues(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const Matrix j = sys.jacobian(sys.initial_state());
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(j));
}
BENCHMARK(BM_Eigenvalues)->Arg(2)->Arg(8);
