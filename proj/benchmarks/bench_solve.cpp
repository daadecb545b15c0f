#include <benchmark/benchmark.h>

#include "odescm/builtins.hpp"
#include "odescm/lee.hpp"
#include "odescm/scm.hpp"
#include "odescm/suite.hpp"

using namespace odescm;

static void BM_SolveLee(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const Lee lee = lee_from_ode(sys);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lee(lee));
}
BENCHMARK(BM_SolveLee)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_BuildScm(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const Lee lee = lee_from_ode(sys);
  for (auto _ : state) benchmark::DoNotOptimize(build_scm(lee));
}
BENCHMARK(BM_BuildScm)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_SolveScm(benchmark::State& state) {
  const OdeSystem sys(builtin_mass_spring(MassSpringParams::uniform(static_cast<std::size_t>(state.range(0)))));
  const Scm scm = build_scm(lee_from_ode(sys));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scm(scm));
}
BENCHMARK(BM_SolveScm)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_VerificationSuite(benchmark::State& state) {
  const auto models = default_suite();
  for (auto _ : state) benchmark::DoNotOptimize(run_verification_suite(models, 1, 7));
}
BENCHMARK(BM_VerificationSuite)->Unit(benchmark::kMillisecond);
