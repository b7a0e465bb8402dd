#include <doctest.h>

#include <cmath>

#include "seqlab/cnf.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/optimize.hpp"
#include "test_util.hpp"

using namespace seqlab;

namespace {

/// Epoch labels are the XOR of the two feature signs: linearly inseparable
/// per epoch and carrying no sequence structure.
Dataset xor_toy(int sequences, int length, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.alphabet = testutil::alphabet_of_size(2);
    d.dim = 2;
    for (int s = 0; s < sequences; ++s) {
        LabeledSequence seq;
        seq.x.id = "xor" + std::to_string(s);
        seq.x.epochs.resize(length, 2);
        seq.y.labels.resize(static_cast<std::size_t>(length));
        for (int t = 0; t < length; ++t) {
            const double a = rng.uniform(0.3, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
            const double b = rng.uniform(0.3, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
            seq.x.epochs(t, 0) = a;
            seq.x.epochs(t, 1) = b;
            seq.y.labels[static_cast<std::size_t>(t)] = (a > 0.0) != (b > 0.0) ? 1 : 0;
        }
        d.sequences.push_back(std::move(seq));
    }
    return d;
}

double train_accuracy_crf(const crf::CrfModel& model, const Dataset& d) {
    long correct = 0, total = 0;
    for (const auto& seq : d.sequences) {
        const LabelSequence pred = crf::predict(model, seq.x);
        for (int t = 0; t < seq.x.length(); ++t) {
            correct += pred.labels[static_cast<std::size_t>(t)] ==
                       seq.y.labels[static_cast<std::size_t>(t)];
            ++total;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

double train_accuracy_cnf(const cnf::CnfModel& model, const Dataset& d) {
    long correct = 0, total = 0;
    for (const auto& seq : d.sequences) {
        const LabelSequence pred = cnf::predict(model, seq.x);
        for (int t = 0; t < seq.x.length(); ++t) {
            correct += pred.labels[static_cast<std::size_t>(t)] ==
                       seq.y.labels[static_cast<std::size_t>(t)];
            ++total;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("gate_forward: zero weights give 0.5, large inputs saturate") {
    cnf::GateLayer gate;
    gate.weights = Eigen::MatrixXd::Zero(3, 4);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    const Eigen::VectorXd out = cnf::gate_forward(gate, x);
    for (int g = 0; g < 3; ++g) CHECK(out(g) == doctest::Approx(0.5));

    gate.weights(0, 3) = 30.0;   // bias drives the preactivation to +30
    gate.weights(1, 3) = -30.0;
    const Eigen::VectorXd sat = cnf::gate_forward(gate, x);
    CHECK(std::abs(sat(0) - 1.0) < 1e-9);
    CHECK(sat(1) < 1e-9);
}

TEST_CASE("gate output is monotone in the preactivation and bounded") {
    cnf::GateLayer gate = cnf::random_gate_layer(4, 2, 3);
    Eigen::VectorXd x(2);
    x << 0.3, -0.8;
    double prev = -1.0;
    for (double shift = -5.0; shift <= 5.0; shift += 0.5) {
        cnf::GateLayer g = gate;
        g.weights.col(2).array() += shift;
        const Eigen::VectorXd out = cnf::gate_forward(g, x);
        CHECK(out(0) > 0.0);
        CHECK(out(0) < 1.0);
        CHECK(out(0) >= prev);
        prev = out(0);
    }
}

TEST_CASE("zero state weights reduce node potentials to the biases") {
    cnf::CnfModel model = testutil::random_cnf(3, 4, 2, 0.0, 11);
    model.state.setZero();
    const Dataset d = testutil::random_dataset(3, 2, {5}, 12);
    const auto pots = cnf::build_potentials(model, d.sequences[0].x);
    for (int t = 0; t < 5; ++t) {
        for (int l = 0; l < 3; ++l) CHECK(pots.node(t, l) == doctest::Approx(model.bias(l)));
    }
}

TEST_CASE("with one gate the node score is affine in the gate output") {
    cnf::CnfModel model = testutil::random_cnf(2, 1, 2, 0.0, 15);
    const Dataset d = testutil::random_dataset(2, 2, {6}, 16);
    const auto& x = d.sequences[0].x;
    const auto pots = cnf::build_potentials(model, x);
    for (int t = 0; t < 6; ++t) {
        const double g = cnf::gate_forward(model.gate, x.epochs.row(t).transpose())(0);
        for (int l = 0; l < 2; ++l) {
            CHECK(pots.node(t, l) ==
                  doctest::Approx(model.bias(l) + model.state(l, 0) * g).epsilon(1e-12));
        }
    }
}

TEST_CASE("gated marginals match enumeration") {
    const cnf::CnfModel model = testutil::random_cnf(3, 3, 2, 0.0, 21);
    const Dataset d = testutil::random_dataset(3, 2, {3}, 22);
    const auto pots = cnf::build_potentials(model, d.sequences[0].x);
    const auto marg = chain::marginals(pots);
    const auto oracle = testutil::enumerate_chain(pots);
    CHECK((marg.node - oracle.node_marginals).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("node potentials stay within the bias plus state-weight mass") {
    // logistic outputs are in (0,1), so |node - bias| < sum_g |state(l, g)|
    const cnf::CnfModel model = testutil::random_cnf(3, 5, 2, 0.0, 31);
    const Dataset d = testutil::random_dataset(3, 2, {10}, 32);
    const auto pots = cnf::build_potentials(model, d.sequences[0].x);
    for (int t = 0; t < 10; ++t) {
        for (int l = 0; l < 3; ++l) {
            CHECK(std::abs(pots.node(t, l) - model.bias(l)) <=
                  model.state.row(l).cwiseAbs().sum());
        }
    }
}

TEST_CASE("gradient matches finite differences on random configurations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int L = 2 + static_cast<int>(seed % 2);
        const int K = 1 + static_cast<int>(seed % 3);
        const int m = 1 + static_cast<int>(seed % 3);
        const double l2 = (seed % 2 == 0) ? 0.0 : 0.1;
        const cnf::CnfModel model = testutil::random_cnf(L, K, m, l2, 300 + seed);
        const Dataset d = testutil::random_dataset(L, m, {3, 4}, 400 + seed);

        cnf::CnfModel scratch = model;
        const optim::Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            cnf::unpack(v, scratch);
            auto [value, grad] = cnf::nll_and_gradient(scratch, d);
            g = grad;
            return value;
        };
        CHECK(optim::check_gradient(f, cnf::pack(model), 1e-5) <= 1e-4);
    }
}

TEST_CASE("unused gates receive zero gradient") {
    cnf::CnfModel model = testutil::random_cnf(3, 4, 2, 0.0, 41);
    model.state.setZero();
    const Dataset d = testutil::random_dataset(3, 2, {5}, 42);
    const auto [nll, grad] = cnf::nll_and_gradient(model, d);
    // gate block sits at the tail of the packed layout
    const int gate_size = 4 * 3;
    CHECK(grad.tail(gate_size).cwiseAbs().maxCoeff() == 0.0);

    // and the nll equals the uniform-model value whatever the gates say
    model.bias.setZero();
    model.trans.setZero();
    const auto [uniform_nll, g2] = cnf::nll_and_gradient(model, d);
    CHECK(uniform_nll == doctest::Approx(5.0 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("identity-gate CNF reproduces the CRF likelihood exactly") {
    const crf::CrfModel reference = testutil::random_crf(3, 4, 0.0, 51);
    const cnf::CnfModel embedded = testutil::cnf_from_crf_identity(reference);
    const Dataset d = testutil::random_dataset(3, 4, {5, 6}, 52);

    const double crf_nll = crf::nll_and_gradient(reference, d).first;
    const double cnf_nll = cnf::nll_and_gradient(embedded, d).first;
    CHECK(std::abs(crf_nll - cnf_nll) < 1e-10);

    for (const auto& seq : d.sequences) {
        CHECK(crf::predict(reference, seq.x) == cnf::predict(embedded, seq.x));
    }
}

TEST_CASE("gates separate the XOR toy while a linear CRF cannot") {
    const Dataset d = xor_toy(2, 200, 61);

    crf::TrainConfig crf_config;
    crf_config.l2 = 1e-3;
    const crf::CrfModel linear = crf::train(d, crf_config);
    CHECK(train_accuracy_crf(linear, d) <= 0.60);

    cnf::TrainConfig cnf_config;
    cnf_config.gates = 4;
    cnf_config.l2 = 1e-4;
    cnf_config.seed = 5;
    const cnf::CnfModel gated = cnf::train(d, cnf_config);
    CHECK(train_accuracy_cnf(gated, d) >= 0.95);
}

TEST_CASE("training is deterministic per seed") {
    const Dataset d = xor_toy(1, 60, 71);
    cnf::TrainConfig config;
    config.gates = 3;
    config.seed = 9;
    config.optimizer.max_iterations = 50;
    const cnf::CnfModel a = cnf::train(d, config);
    const cnf::CnfModel b = cnf::train(d, config);
    CHECK((cnf::pack(a).array() == cnf::pack(b).array()).all());
}
