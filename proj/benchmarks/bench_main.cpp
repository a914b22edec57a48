#include <benchmark/benchmark.h>

#include <random>

#include "ctrg/lp.hpp"
#include "ctrg/models.hpp"
#include "ctrg/npa.hpp"
#include "ctrg/pipeline.hpp"
#include "ctrg/sdp.hpp"

namespace {

using namespace ctrg;

void BM_SymEig(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealSymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = u(rng);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    for (auto _ : state) benchmark::DoNotOptimize(sym_eig(m));
}
BENCHMARK(BM_SymEig)->Arg(25)->Arg(100)->Arg(300);

void BM_Kron4x4(benchmark::State& state) {
    const auto m = ion_model({0.02});
    for (auto _ : state)
        benchmark::DoNotOptimize(kron(m.pi_a(0, 0), m.pi_b(0, 0)));
}
BENCHMARK(BM_Kron4x4);

void BM_GuessingLp(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(p_star_lp(2.8, 0.012));
}
BENCHMARK(BM_GuessingLp);

void BM_RandomnessSdpL1(benchmark::State& state) {
    const auto rp = randomness_program(2.5, 0.003, {0, 0, 0, 0}, MonomialSet::level("l1"));
    const auto cp = rp.to_conic();
    for (auto _ : state) benchmark::DoNotOptimize(solve(cp));
}
BENCHMARK(BM_RandomnessSdpL1)->Unit(benchmark::kMillisecond);

void BM_RandomnessSdpL1XY(benchmark::State& state) {
    const auto rp = randomness_program(2.5, 0.003, {0, 0, 0, 0}, MonomialSet::level("l1xy"));
    const auto cp = rp.to_conic();
    for (auto _ : state) benchmark::DoNotOptimize(solve(cp));
}
BENCHMARK(BM_RandomnessSdpL1XY)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_ToeplitzExtract(benchmark::State& state) {
    const std::uint64_t k = static_cast<std::uint64_t>(state.range(0));
    const std::uint64_t m = k / 2;
    std::mt19937_64 rng(2);
    BitString bits = BitString::zeros(k), seed = BitString::zeros(m + k - 1);
    for (auto& b : bits.bytes) b = static_cast<std::uint8_t>(rng());
    for (auto& b : seed.bytes) b = static_cast<std::uint8_t>(rng());
    for (auto _ : state) benchmark::DoNotOptimize(toeplitz_extract(bits, seed, m));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(m));
}
BENCHMARK(BM_ToeplitzExtract)->Arg(1 << 12)->Arg(1 << 16);

void BM_JosephsonChi(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(josephson_chi_bound({0.0059, 0.0031}));
}
BENCHMARK(BM_JosephsonChi)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
