#include <benchmark/benchmark.h>

#include "seqlab/bench.hpp"
#include "seqlab/cnf.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/fcm.hpp"

using namespace seqlab;

namespace {

Dataset synth_data(int sequences, int length) {
    bench::SynthConfig config;
    config.states = 5;
    config.dim = 8;
    config.sequences = sequences;
    config.length = length;
    config.separation = 2.0;
    config.seed = 1;
    const Dataset raw = bench::generate_synth(config).data;
    return standardize(raw, raw).first;
}

}  // namespace

static void BM_CrfGradient(benchmark::State& state) {
    const Dataset data = synth_data(4, static_cast<int>(state.range(0)));
    crf::CrfModel model = crf::zero_model(data.alphabet, data.dim, 1e-2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(crf::nll_and_gradient(model, data).first);
    }
}
BENCHMARK(BM_CrfGradient)->Arg(100)->Arg(500);

static void BM_CnfGradient(benchmark::State& state) {
    const Dataset data = synth_data(4, static_cast<int>(state.range(0)));
    cnf::CnfModel model;
    model.alphabet = data.alphabet;
    model.gate = cnf::random_gate_layer(5, data.dim, 3);
    model.state = Eigen::MatrixXd::Zero(5, 5);
    model.trans = Eigen::MatrixXd::Zero(5, 5);
    model.bias = Eigen::VectorXd::Zero(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cnf::nll_and_gradient(model, data).first);
    }
}
BENCHMARK(BM_CnfGradient)->Arg(100)->Arg(500);

static void BM_FcmIteration(benchmark::State& state) {
    const Dataset data = synth_data(4, static_cast<int>(state.range(0)));
    const Eigen::MatrixXd x = data.stack_epochs();
    const Eigen::MatrixXd u = fcm::init_partition(static_cast<int>(x.rows()), 5, 1);
    for (auto _ : state) {
        const Eigen::MatrixXd v = fcm::update_centroids(x, u, 1.05);
        benchmark::DoNotOptimize(fcm::update_partition(x, v, 1.05));
    }
}
BENCHMARK(BM_FcmIteration)->Arg(250)->Arg(1000);
