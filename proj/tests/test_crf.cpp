#include <doctest.h>

#include <cmath>

#include "seqlab/crf.hpp"
#include "seqlab/optimize.hpp"
#include "test_util.hpp"

using namespace seqlab;

namespace {

/// Per-epoch linearly separable toy: one feature, negative -> label 0,
/// positive -> label 1.
Dataset separable_toy(int length, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.alphabet = testutil::alphabet_of_size(2);
    d.dim = 1;
    for (int s = 0; s < 2; ++s) {
        LabeledSequence seq;
        seq.x.id = "t" + std::to_string(s);
        seq.x.epochs.resize(length, 1);
        seq.y.labels.resize(static_cast<std::size_t>(length));
        for (int t = 0; t < length; ++t) {
            const double v = rng.uniform(0.25, 1.5) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
            seq.x.epochs(t, 0) = v;
            seq.y.labels[static_cast<std::size_t>(t)] = v < 0.0 ? 0 : 1;
        }
        d.sequences.push_back(std::move(seq));
    }
    return d;
}

}  // namespace

TEST_CASE("score_sequence basics") {
    const crf::CrfModel zero = crf::zero_model(testutil::alphabet_of_size(3), 2, 0.0);
    const Dataset d = testutil::random_dataset(3, 2, {4}, 1);
    CHECK(crf::score_sequence(zero, d.sequences[0].x, d.sequences[0].y) == 0.0);

    crf::CrfModel bias_only = zero;
    bias_only.bias << 0.5, -1.0, 2.0;
    ObservationSequence x;
    x.id = "one";
    x.epochs = Eigen::MatrixXd::Zero(1, 2);
    CHECK(crf::score_sequence(bias_only, x, LabelSequence{{2}}) == doctest::Approx(2.0));
}

TEST_CASE("score_sequence equals the hand-expanded per-position sum") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.0, 7);
    const Dataset d = testutil::random_dataset(3, 2, {3}, 8);
    const auto& x = d.sequences[0].x;
    const auto& y = d.sequences[0].y.labels;

    double expected = 0.0;
    for (int t = 0; t < 3; ++t) {
        expected += model.bias(y[static_cast<std::size_t>(t)]);
        for (int j = 0; j < 2; ++j) {
            expected += model.state(y[static_cast<std::size_t>(t)], j) * x.epochs(t, j);
        }
    }
    expected += model.trans(y[0], y[1]) + model.trans(y[1], y[2]);

    CHECK(crf::score_sequence(model, x, d.sequences[0].y) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("score_sequence validates lengths and dimensions") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.0, 7);
    const Dataset d = testutil::random_dataset(3, 2, {3}, 8);
    LabelSequence short_y{{0, 1}};
    CHECK_THROWS_AS(crf::score_sequence(model, d.sequences[0].x, short_y), InputError);
    const Dataset wide = testutil::random_dataset(3, 4, {3}, 8);
    CHECK_THROWS_AS(crf::score_sequence(model, wide.sequences[0].x, wide.sequences[0].y),
                    InputError);
}

TEST_CASE("zero weights build zero potentials") {
    const crf::CrfModel zero = crf::zero_model(testutil::alphabet_of_size(3), 2, 0.0);
    const Dataset d = testutil::random_dataset(3, 2, {4}, 15);
    const auto pots = crf::build_potentials(zero, d.sequences[0].x);
    CHECK(pots.node.isZero());
    CHECK(pots.edge.isZero());
}

TEST_CASE("conditional probabilities normalize over all labelings") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.0, 21);
    const Dataset d = testutil::random_dataset(3, 2, {3}, 22);
    const auto& x = d.sequences[0].x;

    const double log_z = chain::log_forward(crf::build_potentials(model, x)).log_partition;

    double total = 0.0;
    std::vector<int> labels(3, 0);
    while (true) {
        const double p = std::exp(crf::score_sequence(model, x, LabelSequence{labels}) - log_z);
        CHECK(p > 0.0);
        CHECK(p <= 1.0 + 1e-12);
        total += p;
        int pos = 2;
        while (pos >= 0 && ++labels[static_cast<std::size_t>(pos)] == 3) {
            labels[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero-weight nll is the uniform-model value") {
    const crf::CrfModel model = crf::zero_model(testutil::alphabet_of_size(5), 3, 0.0);
    const Dataset d = testutil::random_dataset(5, 3, {4}, 31);
    const auto [nll, grad] = crf::nll_and_gradient(model, d);
    CHECK(nll == doctest::Approx(4.0 * std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("duplicating every sequence doubles the nll at l2 = 0") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.0, 41);
    Dataset d = testutil::random_dataset(3, 2, {4, 5}, 42);
    const double once = crf::nll_and_gradient(model, d).first;
    Dataset doubled = d;
    for (const auto& s : d.sequences) {
        LabeledSequence copy = s;
        copy.x.id += "_copy";
        doubled.sequences.push_back(copy);
    }
    CHECK(crf::nll_and_gradient(model, doubled).first == doctest::Approx(2.0 * once));
}

TEST_CASE("gradient agrees with finite differences on random configurations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int L = 2 + static_cast<int>(seed % 3);
        const int m = 1 + static_cast<int>(seed % 4);
        const double l2 = (seed % 2 == 0) ? 0.0 : 0.1;
        const crf::CrfModel model = testutil::random_crf(L, m, l2, 100 + seed);
        const Dataset d = testutil::random_dataset(L, m, {3, 4}, 200 + seed);

        crf::CrfModel scratch = model;
        const optim::Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            crf::unpack(v, scratch);
            auto [value, grad] = crf::nll_and_gradient(scratch, d);
            g = grad;
            return value;
        };
        CHECK(optim::check_gradient(f, crf::pack(model), 1e-5) <= 1e-4);
    }
}

TEST_CASE("every weight block passes the gradient check individually") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.05, 51);
    const Dataset d = testutil::random_dataset(3, 2, {4}, 52);
    const int L = 3, m = 2;

    crf::CrfModel scratch = model;
    const optim::Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        crf::unpack(v, scratch);
        auto [value, grad] = crf::nll_and_gradient(scratch, d);
        g = grad;
        return value;
    };

    Eigen::VectorXd x = crf::pack(model);
    Eigen::VectorXd analytic(x.size());
    f(x, analytic);
    Eigen::VectorXd scratch_grad(x.size());
    const double eps = 1e-5;
    const auto block_error = [&](int begin, int count) {
        double worst = 0.0;
        for (int i = begin; i < begin + count; ++i) {
            Eigen::VectorXd probe = x;
            probe(i) = x(i) + eps;
            const double fp = f(probe, scratch_grad);
            probe(i) = x(i) - eps;
            const double fm = f(probe, scratch_grad);
            const double fd = (fp - fm) / (2.0 * eps);
            worst = std::max(worst, std::abs(analytic(i) - fd) /
                                        std::max(1.0, std::abs(analytic(i))));
        }
        return worst;
    };
    CHECK(block_error(0, L * m) <= 1e-4);              // state
    CHECK(block_error(L * m, L * L) <= 1e-4);          // transition
    CHECK(block_error(L * m + L * L, L) <= 1e-4);      // bias
}

TEST_CASE("training solves the separable toy exactly") {
    const Dataset d = separable_toy(40, 61);
    crf::TrainConfig config;
    config.l2 = 1e-3;
    crf::TrainInfo info;
    const crf::CrfModel model = crf::train(d, config, &info);

    long correct = 0, total = 0;
    for (const auto& seq : d.sequences) {
        const LabelSequence pred = crf::predict(model, seq.x);
        CHECK(pred.length() == seq.x.length());
        for (int t = 0; t < seq.x.length(); ++t) {
            correct += pred.labels[static_cast<std::size_t>(t)] ==
                       seq.y.labels[static_cast<std::size_t>(t)];
            ++total;
        }
    }
    CHECK(correct == total);

    // line-search contract: accepted iterates never increase the objective
    for (std::size_t i = 1; i < info.opt.history.size(); ++i) {
        CHECK(info.opt.history[i] <= info.opt.history[i - 1]);
    }
}

TEST_CASE("growing regularization drives the weights to the tie-break limit") {
    const Dataset d = separable_toy(30, 71);
    const auto weight_mass = [&](double l2) {
        crf::TrainConfig config;
        config.l2 = l2;
        const crf::CrfModel model = crf::train(d, config);
        return std::max({model.state.cwiseAbs().maxCoeff(), model.trans.cwiseAbs().maxCoeff(),
                         model.bias.cwiseAbs().maxCoeff()});
    };
    const double at_1e3 = weight_mass(1e3);
    const double at_1e6 = weight_mass(1e6);
    const double at_1e9 = weight_mass(1e9);
    CHECK(at_1e6 < at_1e3);
    CHECK(at_1e9 < at_1e6);
    CHECK(at_1e9 < 1e-6);

    // in the limit the weights vanish and every epoch falls to the
    // tie-break label
    const crf::CrfModel limit = crf::zero_model(d.alphabet, d.dim, 0.0);
    const LabelSequence pred = crf::predict(limit, d.sequences[0].x);
    for (int l : pred.labels) CHECK(l == 0);
}

TEST_CASE("zero-weight prediction is the tie-break label everywhere") {
    const crf::CrfModel model = crf::zero_model(testutil::alphabet_of_size(4), 2, 0.0);
    const Dataset d = testutil::random_dataset(4, 2, {6}, 81);
    const LabelSequence pred = crf::predict(model, d.sequences[0].x);
    CHECK(pred.length() == 6);
    for (int l : pred.labels) CHECK(l == 0);
}

TEST_CASE("adding a constant to all biases leaves predictions unchanged") {
    const crf::CrfModel model = testutil::random_crf(3, 2, 0.0, 91);
    const Dataset d = testutil::random_dataset(3, 2, {7}, 92);
    crf::CrfModel shifted = model;
    shifted.bias.array() += 4.2;
    for (const auto& seq : d.sequences) {
        CHECK(crf::predict(model, seq.x) == crf::predict(shifted, seq.x));
    }
}
