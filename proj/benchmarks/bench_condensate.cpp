#include <benchmark/benchmark.h>

#include "condensate/concentration.hpp"

using namespace condensate;

namespace {

CovOperator reference_operator(std::size_t m) {
  return assemble(SqExpKernel{1.0, 0.2}, Grid(0.0, 1.0, m));
}

void BM_SqrtFactor(benchmark::State& state) {
  const CovOperator c = reference_operator(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    SqrtFactor s = sqrt_factor(c);
    benchmark::DoNotOptimize(s.eigenvalues().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SqrtFactor)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNCubed);

void BM_ConditionalSample(benchmark::State& state) {
  const CovOperator c = reference_operator(static_cast<std::size_t>(state.range(0)));
  const SqrtFactor s = sqrt_factor(c);
  const LinearFunctional t = make_point_functional(c.grid(), 0.5);
  const Conditioner cond(s, t);
  const ConditionSpec spec{1000.0, RandomRho{}, ScalarField::Complex};
  std::uint64_t i = 0;
  for (auto _ : state) {
    Stream rng = Stream::substream(1, i++);
    FieldSample smp = cond.sample(spec, rng);
    benchmark::DoNotOptimize(smp.values.data());
  }
}
BENCHMARK(BM_ConditionalSample)->Arg(128)->Arg(256)->Arg(512);

void BM_Sweep(benchmark::State& state) {
  const CovOperator c = reference_operator(128);
  const SqrtFactor s = sqrt_factor(c);
  const LinearFunctional t = make_point_functional(c.grid(), 0.5);
  SweepOptions opt;
  opt.u_list = {10.0, 100.0, 1000.0, 10000.0};
  opt.n_mc = 200;
  opt.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    SweepReport rep = sweep(s, c, t, opt);
    benchmark::DoNotOptimize(rep.records.data());
  }
  state.SetItemsProcessed(state.iterations() * 800);
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
