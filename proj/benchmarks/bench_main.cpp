#include <ergoflow/birkhoff.hpp>
#include <ergoflow/constructor.hpp>
#include <ergoflow/fixtures.hpp>
#include <ergoflow/flow.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace ergoflow;

namespace
{

std::vector<BigInt> random_prefix(std::size_t depth, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(1, 10);
    std::vector<BigInt> a;
    for (std::size_t i = 0; i < depth; ++i)
        a.emplace_back(d(rng));
    return a;
}

void BM_Convergents(benchmark::State &state)
{
    const auto a = random_prefix(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(CFNumber(a));
}
BENCHMARK(BM_Convergents)->Arg(30)->Arg(300);

void BM_BestApprox(benchmark::State &state)
{
    const CFNumber cf(random_prefix(30, 2));
    std::size_t n = 1;
    while (cf.q(n + 1) <= 10000)
        ++n;
    for (auto _ : state)
        benchmark::DoNotOptimize(best_approx_check(cf, n));
}
BENCHMARK(BM_BestApprox);

void BM_Kesten(benchmark::State &state)
{
    const CFNumber cf = fixtures::fibonacci();
    for (auto _ : state)
        benchmark::DoNotOptimize(kesten_partition(cf, 15, 1500));
}
BENCHMARK(BM_Kesten);

// Direct orbit walk against the convergent-block evaluation.
void BM_BirkhoffDirect(benchmark::State &state)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::fibonacci());
    const Fraction x = Fraction::make(1, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(birkhoff_sum(r1, rot, x, state.range(0)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BirkhoffDirect)->RangeMultiplier(10)->Range(100, 100000);

void BM_BirkhoffFast(benchmark::State &state)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::fibonacci());
    const Fraction x = Fraction::make(1, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(birkhoff_fast(r1, rot, x, state.range(0)));
}
BENCHMARK(BM_BirkhoffFast)->RangeMultiplier(10)->Range(100, 100000);

void BM_XKernel(benchmark::State &state)
{
    const Rotation rot(fixtures::beta());
    for (auto _ : state)
        benchmark::DoNotOptimize(x_kernel(rot, 10000, 37));
}
BENCHMARK(BM_XKernel);

void BM_FlowApply(benchmark::State &state)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::beta(7));
    const FlowPoint p = make_flow_point(r1, rot, Fraction::make(2, 9), 0.1);
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(flow_apply(r1, rot, p, t));
}
BENCHMARK(BM_FlowApply)->Arg(146)->Arg(37385)->Arg(2450063506LL);

void BM_Correlate(benchmark::State &state)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::beta(7));
    const Observable g = Observable::cosine(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(correlate(r1, rot, g, g, 37385.0, {static_cast<std::size_t>(state.range(0)), 1, 1}));
}
BENCHMARK(BM_Correlate)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GaussKuzmin(benchmark::State &state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(gauss_kuzmin_sample(static_cast<std::size_t>(state.range(0)), 15, 0, 1));
}
BENCHMARK(BM_GaussKuzmin)->Arg(100000)->Unit(benchmark::kMillisecond);

// Construction, partitions, (S1)/(S2) and a small-sample score per stage.
void BM_MixingShadow(benchmark::State &state)
{
    const Roof roof = fixtures::construction_roof();
    const CFNumber beta = fixtures::beta(7);
    for (auto _ : state)
        benchmark::DoNotOptimize(mixing_shadow(beta, roof, {2, {2000, 1, 1}, 0.25}));
}
BENCHMARK(BM_MixingShadow)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
