#include "seqlab/cnf.hpp"

#include <cmath>

#include "seqlab/rng.hpp"

namespace seqlab::cnf {

namespace {

void check_dims(const CnfModel& model, const ObservationSequence& x) {
    if (x.dim() != model.feature_dim()) {
        throw InputError("observation dimension " + std::to_string(x.dim()) +
                         " does not match gate input dimension " +
                         std::to_string(model.feature_dim()));
    }
    if (x.length() < 1) throw InputError("empty observation sequence");
}

Eigen::MatrixXd activate(const GateLayer& gate, Eigen::MatrixXd pre) {
    if (gate.activation == Activation::Identity) return pre;
    return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
}

Eigen::MatrixXd preactivations(const GateLayer& gate, const Eigen::MatrixXd& epochs) {
    const int m = gate.input_dim();
    Eigen::MatrixXd pre = epochs * gate.weights.leftCols(m).transpose();
    pre.rowwise() += gate.weights.col(m).transpose();
    return pre;
}

}  // namespace

GateLayer random_gate_layer(int gates, int input_dim, std::uint64_t seed) {
    if (gates < 1) throw ConfigError("gate count must be at least 1");
    if (input_dim < 1) throw ConfigError("gate input dimension must be at least 1");
    GateLayer g;
    g.weights.resize(gates, input_dim + 1);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (int i = 0; i < gates; ++i) {
        for (int j = 0; j <= input_dim; ++j) g.weights(i, j) = rng.uniform(-0.5, 0.5) * scale;
    }
    return g;
}

Eigen::VectorXd gate_forward(const GateLayer& gate, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != gate.input_dim()) {
        throw InputError("gate input has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(gate.input_dim()));
    }
    Eigen::MatrixXd one_row = x.transpose();
    return activate(gate, preactivations(gate, one_row)).row(0);
}

Eigen::MatrixXd gate_forward_all(const GateLayer& gate, const Eigen::MatrixXd& epochs) {
    if (epochs.cols() != gate.input_dim()) {
        throw InputError("gate input has dimension " + std::to_string(epochs.cols()) +
                         ", expected " + std::to_string(gate.input_dim()));
    }
    return activate(gate, preactivations(gate, epochs));
}

chain::ChainPotentials build_potentials(const CnfModel& model, const ObservationSequence& x) {
    check_dims(model, x);
    const Eigen::MatrixXd gated = gate_forward_all(model.gate, x.epochs);
    chain::ChainPotentials p;
    p.node = gated * model.state.transpose();
    p.node.rowwise() += model.bias.transpose();
    p.edge = model.trans;
    return p;
}

int packed_size(int num_labels, int gates, int feature_dim) {
    return num_labels * gates + num_labels * num_labels + num_labels + gates * (feature_dim + 1);
}

Eigen::VectorXd pack(const CnfModel& model) {
    const int L = model.num_labels();
    const int K = model.gates();
    const int m = model.feature_dim();
    Eigen::VectorXd v(packed_size(L, K, m));
    int at = 0;
    for (int l = 0; l < L; ++l)
        for (int g = 0; g < K; ++g) v(at++) = model.state(l, g);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) v(at++) = model.trans(a, b);
    for (int l = 0; l < L; ++l) v(at++) = model.bias(l);
    for (int g = 0; g < K; ++g)
        for (int j = 0; j <= m; ++j) v(at++) = model.gate.weights(g, j);
    return v;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, CnfModel& model) {
    const int L = model.num_labels();
    const int K = model.gates();
    const int m = model.feature_dim();
    if (v.size() != packed_size(L, K, m)) throw InputError("packed CNF vector has wrong size");
    int at = 0;
    for (int l = 0; l < L; ++l)
        for (int g = 0; g < K; ++g) model.state(l, g) = v(at++);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) model.trans(a, b) = v(at++);
    for (int l = 0; l < L; ++l) model.bias(l) = v(at++);
    for (int g = 0; g < K; ++g)
        for (int j = 0; j <= m; ++j) model.gate.weights(g, j) = v(at++);
}

std::pair<double, Eigen::VectorXd> nll_and_gradient(const CnfModel& model, const Dataset& data) {
    if (data.num_sequences() == 0) throw InputError("nll of an empty dataset");
    const int L = model.num_labels();
    const int K = model.gates();
    const int m = model.feature_dim();

    double nll = 0.0;
    Eigen::MatrixXd g_state = Eigen::MatrixXd::Zero(L, K);
    Eigen::MatrixXd g_trans = Eigen::MatrixXd::Zero(L, L);
    Eigen::VectorXd g_bias = Eigen::VectorXd::Zero(L);
    Eigen::MatrixXd g_gate = Eigen::MatrixXd::Zero(K, m + 1);

    for (const auto& seq : data.sequences) {
        const auto& x = seq.x;
        const auto& y = seq.y;
        check_dims(model, x);
        if (x.length() != y.length()) throw InputError("misaligned labels");
        const int n = x.length();

        const Eigen::MatrixXd pre = preactivations(model.gate, x.epochs);
        const Eigen::MatrixXd gated = activate(model.gate, pre);

        chain::ChainPotentials pots;
        pots.node = gated * model.state.transpose();
        pots.node.rowwise() += model.bias.transpose();
        pots.edge = model.trans;
        const chain::ChainMarginals marg = chain::marginals(pots);

        // log p(y|x) = score(y) - log Z
        double score = 0.0;
        for (int t = 0; t < n; ++t) {
            const int l = y.labels[static_cast<std::size_t>(t)];
            score += model.bias(l) + model.state.row(l).dot(gated.row(t));
        }
        for (int t = 0; t + 1 < n; ++t) {
            score += model.trans(y.labels[static_cast<std::size_t>(t)],
                                 y.labels[static_cast<std::size_t>(t + 1)]);
        }
        nll += marg.log_partition - score;

        // delta(t, l) = p(y_t = l | x) - [y_t == l]
        Eigen::MatrixXd delta = marg.node;
        for (int t = 0; t < n; ++t) delta(t, y.labels[static_cast<std::size_t>(t)]) -= 1.0;

        g_state.noalias() += delta.transpose() * gated;
        g_bias += delta.colwise().sum();
        for (const auto& e : marg.edge) g_trans += e;
        for (int t = 0; t + 1 < n; ++t) {
            g_trans(y.labels[static_cast<std::size_t>(t)],
                    y.labels[static_cast<std::size_t>(t + 1)]) -= 1.0;
        }

        // chain rule into the gates: back(t, g) = sum_l delta(t, l) state(l, g),
        // times the activation derivative at the preactivation.
        Eigen::MatrixXd back = delta * model.state;  // n x K
        if (model.gate.activation == Activation::Logistic) {
            back.array() *= gated.array() * (1.0 - gated.array());
        }
        g_gate.leftCols(m).noalias() += back.transpose() * x.epochs;
        g_gate.col(m) += back.colwise().sum();
    }

    nll += 0.5 * model.l2 *
           (model.state.squaredNorm() + model.trans.squaredNorm() + model.bias.squaredNorm() +
            model.gate.weights.squaredNorm());
    g_state += model.l2 * model.state;
    g_trans += model.l2 * model.trans;
    g_bias += model.l2 * model.bias;
    g_gate += model.l2 * model.gate.weights;

    if (!std::isfinite(nll) || !g_state.allFinite() || !g_trans.allFinite() ||
        !g_bias.allFinite() || !g_gate.allFinite()) {
        throw NumericError("CNF objective produced non-finite values");
    }

    CnfModel shaped = model;
    shaped.state = g_state;
    shaped.trans = g_trans;
    shaped.bias = g_bias;
    shaped.gate.weights = g_gate;
    return {nll, pack(shaped)};
}

CnfModel train(const Dataset& data, const TrainConfig& config, crf::TrainInfo* info) {
    if (data.num_sequences() == 0) throw TrainingError("cannot train on an empty dataset");
    data.validate();
    if (config.gates < 1) throw ConfigError("gate count must be at least 1");

    CnfModel model;
    model.alphabet = data.alphabet;
    const int L = data.alphabet.size();
    model.gate = random_gate_layer(config.gates, data.dim, config.seed);
    model.state = Eigen::MatrixXd::Zero(L, config.gates);
    model.trans = Eigen::MatrixXd::Zero(L, L);
    model.bias = Eigen::VectorXd::Zero(L);
    model.l2 = config.l2;

    CnfModel scratch = model;
    const optim::Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        unpack(v, scratch);
        try {
            auto [f, g] = nll_and_gradient(scratch, data);
            grad = g;
            return f;
        } catch (const NumericError&) {
            grad.setZero();
            return std::numeric_limits<double>::infinity();
        }
    };

    const optim::OptimResult result = optim::minimize(objective, pack(model), config.optimizer);
    if (!std::isfinite(result.value)) {
        throw TrainingError("CNF training diverged to a non-finite objective");
    }
    unpack(result.x, model);
    if (info) info->opt = result;
    return model;
}

LabelSequence predict(const CnfModel& model, const ObservationSequence& x) {
    const chain::ViterbiResult v = chain::viterbi(build_potentials(model, x));
    return LabelSequence{v.path};
}

}  // namespace seqlab::cnf
