#include <benchmark/benchmark.h>

#include "seqlab/chain.hpp"
#include "seqlab/rng.hpp"

using namespace seqlab;

namespace {

chain::ChainPotentials make_potentials(int n, int S, std::uint64_t seed) {
    Rng rng(seed);
    chain::ChainPotentials p;
    p.node.resize(n, S);
    p.edge.resize(S, S);
    for (int t = 0; t < n; ++t)
        for (int s = 0; s < S; ++s) p.node(t, s) = rng.uniform(-1.0, 1.0);
    for (int a = 0; a < S; ++a)
        for (int b = 0; b < S; ++b) p.edge(a, b) = rng.uniform(-1.0, 1.0);
    return p;
}

}  // namespace

static void BM_LogForward(benchmark::State& state) {
    const auto p = make_potentials(static_cast<int>(state.range(0)), 5, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(chain::log_forward(p).log_partition);
    }
}
BENCHMARK(BM_LogForward)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_Marginals(benchmark::State& state) {
    const auto p = make_potentials(static_cast<int>(state.range(0)), 5, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(chain::marginals(p).log_partition);
    }
}
BENCHMARK(BM_Marginals)->Arg(100)->Arg(1000);

static void BM_Viterbi(benchmark::State& state) {
    const auto p = make_potentials(static_cast<int>(state.range(0)), 5, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(chain::viterbi(p).score);
    }
}
BENCHMARK(BM_Viterbi)->Arg(100)->Arg(1000)->Arg(10000);
