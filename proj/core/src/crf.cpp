#include "seqlab/crf.hpp"

#include <cmath>

namespace seqlab::crf {

namespace {

void check_dims(const CrfModel& model, const ObservationSequence& x) {
    if (x.dim() != model.feature_dim()) {
        throw InputError("observation dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(model.feature_dim()));
    }
    if (x.length() < 1) throw InputError("empty observation sequence");
}

void check_pair(const CrfModel& model, const ObservationSequence& x, const LabelSequence& y) {
    check_dims(model, x);
    if (x.length() != y.length()) {
        throw InputError("observation and label sequences have different lengths");
    }
    for (int l : y.labels) {
        if (l < 0 || l >= model.num_labels()) throw InputError("label index out of range");
    }
}

}  // namespace

CrfModel zero_model(const LabelAlphabet& alphabet, int feature_dim, double l2) {
    CrfModel m;
    m.alphabet = alphabet;
    const int L = alphabet.size();
    m.state = Eigen::MatrixXd::Zero(L, feature_dim);
    m.trans = Eigen::MatrixXd::Zero(L, L);
    m.bias = Eigen::VectorXd::Zero(L);
    m.l2 = l2;
    return m;
}

double score_sequence(const CrfModel& model, const ObservationSequence& x, const LabelSequence& y) {
    check_pair(model, x, y);
    double score = 0.0;
    const int n = x.length();
    for (int t = 0; t < n; ++t) {
        const int l = y.labels[static_cast<std::size_t>(t)];
        score += model.bias(l) + model.state.row(l).dot(x.epochs.row(t));
    }
    for (int t = 0; t + 1 < n; ++t) {
        score += model.trans(y.labels[static_cast<std::size_t>(t)],
                             y.labels[static_cast<std::size_t>(t + 1)]);
    }
    return score;
}

chain::ChainPotentials build_potentials(const CrfModel& model, const ObservationSequence& x) {
    check_dims(model, x);
    chain::ChainPotentials p;
    p.node = x.epochs * model.state.transpose();
    p.node.rowwise() += model.bias.transpose();
    p.edge = model.trans;
    return p;
}

int packed_size(int num_labels, int feature_dim) {
    return num_labels * feature_dim + num_labels * num_labels + num_labels;
}

Eigen::VectorXd pack(const CrfModel& model) {
    const int L = model.num_labels();
    const int m = model.feature_dim();
    Eigen::VectorXd v(packed_size(L, m));
    int at = 0;
    for (int l = 0; l < L; ++l)
        for (int j = 0; j < m; ++j) v(at++) = model.state(l, j);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) v(at++) = model.trans(a, b);
    for (int l = 0; l < L; ++l) v(at++) = model.bias(l);
    return v;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, CrfModel& model) {
    const int L = model.num_labels();
    const int m = model.feature_dim();
    if (v.size() != packed_size(L, m)) throw InputError("packed CRF vector has wrong size");
    int at = 0;
    for (int l = 0; l < L; ++l)
        for (int j = 0; j < m; ++j) model.state(l, j) = v(at++);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) model.trans(a, b) = v(at++);
    for (int l = 0; l < L; ++l) model.bias(l) = v(at++);
}

std::pair<double, Eigen::VectorXd> nll_and_gradient(const CrfModel& model, const Dataset& data) {
    if (data.num_sequences() == 0) throw InputError("nll of an empty dataset");
    const int L = model.num_labels();
    const int m = model.feature_dim();

    double nll = 0.0;
    Eigen::MatrixXd g_state = Eigen::MatrixXd::Zero(L, m);
    Eigen::MatrixXd g_trans = Eigen::MatrixXd::Zero(L, L);
    Eigen::VectorXd g_bias = Eigen::VectorXd::Zero(L);

    for (const auto& seq : data.sequences) {
        const auto& x = seq.x;
        const auto& y = seq.y;
        check_pair(model, x, y);

        const chain::ChainPotentials pots = build_potentials(model, x);
        const chain::ChainMarginals marg = chain::marginals(pots);
        nll += marg.log_partition - score_sequence(model, x, y);

        // expected feature counts
        g_state.noalias() += marg.node.transpose() * x.epochs;
        g_bias += marg.node.colwise().sum();
        for (const auto& e : marg.edge) g_trans += e;

        // empirical feature counts
        const int n = x.length();
        for (int t = 0; t < n; ++t) {
            const int l = y.labels[static_cast<std::size_t>(t)];
            g_state.row(l) -= x.epochs.row(t);
            g_bias(l) -= 1.0;
        }
        for (int t = 0; t + 1 < n; ++t) {
            g_trans(y.labels[static_cast<std::size_t>(t)],
                    y.labels[static_cast<std::size_t>(t + 1)]) -= 1.0;
        }
    }

    nll += 0.5 * model.l2 *
           (model.state.squaredNorm() + model.trans.squaredNorm() + model.bias.squaredNorm());
    g_state += model.l2 * model.state;
    g_trans += model.l2 * model.trans;
    g_bias += model.l2 * model.bias;

    if (!std::isfinite(nll) || !g_state.allFinite() || !g_trans.allFinite() || !g_bias.allFinite()) {
        throw NumericError("CRF objective produced non-finite values");
    }

    CrfModel shaped = model;
    shaped.state = g_state;
    shaped.trans = g_trans;
    shaped.bias = g_bias;
    return {nll, pack(shaped)};
}

CrfModel train(const Dataset& data, const TrainConfig& config, TrainInfo* info) {
    if (data.num_sequences() == 0) throw TrainingError("cannot train on an empty dataset");
    data.validate();

    CrfModel model = zero_model(data.alphabet, data.dim, config.l2);
    CrfModel scratch = model;
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
        throw TrainingError("CRF training diverged to a non-finite objective");
    }
    unpack(result.x, model);
    if (info) info->opt = result;
    return model;
}

LabelSequence predict(const CrfModel& model, const ObservationSequence& x) {
    const chain::ViterbiResult v = chain::viterbi(build_potentials(model, x));
    return LabelSequence{v.path};
}

}  // namespace seqlab::crf
