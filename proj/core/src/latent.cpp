#include "seqlab/latent.hpp"

#include <cmath>
#include <limits>

#include "seqlab/rng.hpp"

namespace seqlab::latent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dims(const LatentModel& model, const ObservationSequence& x) {
    if (x.dim() != model.feature_dim()) {
        throw InputError("observation dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(model.feature_dim()));
    }
    if (x.length() < 1) throw InputError("empty observation sequence");
}

/// State-feature inputs per epoch: raw features, or gate outputs for LDCNF.
Eigen::MatrixXd state_inputs(const LatentModel& model, const Eigen::MatrixXd& epochs) {
    if (model.variant == Variant::Ldcnf) return cnf::gate_forward_all(model.gate, epochs);
    return epochs;
}

Eigen::MatrixXd node_scores(const LatentModel& model, const Eigen::MatrixXd& inputs) {
    Eigen::MatrixXd node = inputs * model.state.transpose();
    node.rowwise() += model.bias.transpose();
    return node;
}

int argmax_smallest(const Eigen::Ref<const Eigen::VectorXd>& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

}  // namespace

chain::ChainPotentials build_potentials(const LatentModel& model, const ObservationSequence& x) {
    check_dims(model, x);
    chain::ChainPotentials p;
    p.node = node_scores(model, state_inputs(model, x.epochs));
    p.edge = model.trans;
    return p;
}

chain::ChainPotentials restrict_potentials(const chain::ChainPotentials& p, const HiddenMap& map,
                                           const LabelSequence& y) {
    if (p.length() != y.length()) throw InputError("label sequence length mismatch");
    if (p.states() != map.total()) throw InputError("hidden map does not match potentials");
    chain::ChainPotentials out = p;
    for (int t = 0; t < p.length(); ++t) {
        const int label = y.labels[static_cast<std::size_t>(t)];
        if (label < 0 || label >= map.num_labels) throw InputError("label index out of range");
        for (int h = 0; h < map.total(); ++h) {
            if (map.label_of(h) != label) out.node(t, h) = kNegInf;
        }
    }
    return out;
}

int packed_size(const LatentModel& model) {
    const int H = model.num_hidden();
    const int F = static_cast<int>(model.state.cols());
    int size = H * F + H * H + H;
    if (model.variant == Variant::Hcrf) size += model.num_labels() * H;
    if (model.variant == Variant::Ldcnf) size += static_cast<int>(model.gate.weights.size());
    return size;
}

Eigen::VectorXd pack(const LatentModel& model) {
    Eigen::VectorXd v(packed_size(model));
    int at = 0;
    for (int i = 0; i < model.state.rows(); ++i)
        for (int j = 0; j < model.state.cols(); ++j) v(at++) = model.state(i, j);
    for (int a = 0; a < model.trans.rows(); ++a)
        for (int b = 0; b < model.trans.cols(); ++b) v(at++) = model.trans(a, b);
    for (int h = 0; h < model.bias.size(); ++h) v(at++) = model.bias(h);
    if (model.variant == Variant::Hcrf) {
        for (int l = 0; l < model.compat.rows(); ++l)
            for (int h = 0; h < model.compat.cols(); ++h) v(at++) = model.compat(l, h);
    }
    if (model.variant == Variant::Ldcnf) {
        for (int g = 0; g < model.gate.weights.rows(); ++g)
            for (int j = 0; j < model.gate.weights.cols(); ++j) v(at++) = model.gate.weights(g, j);
    }
    return v;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, LatentModel& model) {
    if (v.size() != packed_size(model)) throw InputError("packed latent vector has wrong size");
    int at = 0;
    for (int i = 0; i < model.state.rows(); ++i)
        for (int j = 0; j < model.state.cols(); ++j) model.state(i, j) = v(at++);
    for (int a = 0; a < model.trans.rows(); ++a)
        for (int b = 0; b < model.trans.cols(); ++b) model.trans(a, b) = v(at++);
    for (int h = 0; h < model.bias.size(); ++h) model.bias(h) = v(at++);
    if (model.variant == Variant::Hcrf) {
        for (int l = 0; l < model.compat.rows(); ++l)
            for (int h = 0; h < model.compat.cols(); ++h) model.compat(l, h) = v(at++);
    }
    if (model.variant == Variant::Ldcnf) {
        for (int g = 0; g < model.gate.weights.rows(); ++g)
            for (int j = 0; j < model.gate.weights.cols(); ++j) model.gate.weights(g, j) = v(at++);
    }
}

std::pair<double, Eigen::VectorXd> ldcrf_nll_and_gradient(const LatentModel& model,
                                                          const Dataset& data) {
    if (model.variant == Variant::Hcrf) {
        throw InputError("ldcrf objective is defined for the LDCRF and LDCNF variants");
    }
    if (data.num_sequences() == 0) throw InputError("nll of an empty dataset");

    const int H = model.num_hidden();
    const int F = static_cast<int>(model.state.cols());
    const int m = model.feature_dim();

    double nll = 0.0;
    Eigen::MatrixXd g_state = Eigen::MatrixXd::Zero(H, F);
    Eigen::MatrixXd g_trans = Eigen::MatrixXd::Zero(H, H);
    Eigen::VectorXd g_bias = Eigen::VectorXd::Zero(H);
    Eigen::MatrixXd g_gate;
    if (model.variant == Variant::Ldcnf) g_gate = Eigen::MatrixXd::Zero(F, m + 1);

    for (const auto& seq : data.sequences) {
        check_dims(model, seq.x);
        if (seq.x.length() != seq.y.length()) throw InputError("misaligned labels");

        const Eigen::MatrixXd inputs = state_inputs(model, seq.x.epochs);
        chain::ChainPotentials full;
        full.node = node_scores(model, inputs);
        full.edge = model.trans;
        const chain::ChainPotentials restricted =
            restrict_potentials(full, model.hidden, seq.y);

        const chain::ChainMarginals m_full = chain::marginals(full);
        const chain::ChainMarginals m_restr = chain::marginals(restricted);
        nll += m_full.log_partition - m_restr.log_partition;

        const Eigen::MatrixXd delta = m_full.node - m_restr.node;  // n x H
        g_state.noalias() += delta.transpose() * inputs;
        g_bias += delta.colwise().sum();
        for (std::size_t t = 0; t < m_full.edge.size(); ++t) {
            g_trans += m_full.edge[t] - m_restr.edge[t];
        }

        if (model.variant == Variant::Ldcnf) {
            Eigen::MatrixXd back = delta * model.state;  // n x K
            if (model.gate.activation == cnf::Activation::Logistic) {
                back.array() *= inputs.array() * (1.0 - inputs.array());
            }
            g_gate.leftCols(m).noalias() += back.transpose() * seq.x.epochs;
            g_gate.col(m) += back.colwise().sum();
        }
    }

    double sq = model.state.squaredNorm() + model.trans.squaredNorm() + model.bias.squaredNorm();
    if (model.variant == Variant::Ldcnf) sq += model.gate.weights.squaredNorm();
    nll += 0.5 * model.l2 * sq;
    g_state += model.l2 * model.state;
    g_trans += model.l2 * model.trans;
    g_bias += model.l2 * model.bias;
    if (model.variant == Variant::Ldcnf) g_gate += model.l2 * model.gate.weights;

    if (!std::isfinite(nll)) throw NumericError("latent objective produced non-finite values");

    LatentModel shaped = model;
    shaped.state = g_state;
    shaped.trans = g_trans;
    shaped.bias = g_bias;
    if (model.variant == Variant::Ldcnf) shaped.gate.weights = g_gate;
    return {nll, pack(shaped)};
}

namespace {

ObservationSequence window_at(const ObservationSequence& x, int center, int window) {
    const int half = window / 2;
    ObservationSequence w;
    w.id = x.id;
    w.epochs.resize(window, x.dim());
    for (int off = -half; off <= half; ++off) {
        const int src = std::clamp(center + off, 0, x.length() - 1);
        w.epochs.row(off + half) = x.epochs.row(src);
    }
    return w;
}

struct WindowScores {
    Eigen::VectorXd log_z;                      // per label
    std::vector<chain::ChainMarginals> margs;   // per label, optional
};

WindowScores hcrf_window_scores(const LatentModel& model, const Eigen::MatrixXd& node_base,
                                bool want_marginals) {
    const int L = model.num_labels();
    WindowScores out;
    out.log_z.resize(L);
    if (want_marginals) out.margs.reserve(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        chain::ChainPotentials p;
        p.node = node_base;
        p.node.rowwise() += model.compat.row(l);
        p.edge = model.trans;
        if (want_marginals) {
            out.margs.push_back(chain::marginals(p));
            out.log_z(l) = out.margs.back().log_partition;
        } else {
            out.log_z(l) = chain::log_forward(p).log_partition;
        }
    }
    return out;
}

}  // namespace

std::pair<double, Eigen::VectorXd> hcrf_nll_and_gradient(const LatentModel& model,
                                                         const Dataset& data) {
    if (model.variant != Variant::Hcrf) throw InputError("hcrf objective needs the HCRF variant");
    if (data.num_sequences() == 0) throw InputError("nll of an empty dataset");
    if (model.window < 1 || model.window % 2 == 0) {
        throw InputError("HCRF window length must be odd and positive");
    }

    const int H = model.num_hidden();
    const int L = model.num_labels();
    const int m = model.feature_dim();

    double nll = 0.0;
    Eigen::MatrixXd g_state = Eigen::MatrixXd::Zero(H, m);
    Eigen::MatrixXd g_trans = Eigen::MatrixXd::Zero(H, H);
    Eigen::VectorXd g_bias = Eigen::VectorXd::Zero(H);
    Eigen::MatrixXd g_compat = Eigen::MatrixXd::Zero(L, H);

    for (const auto& seq : data.sequences) {
        check_dims(model, seq.x);
        if (seq.x.length() != seq.y.length()) throw InputError("misaligned labels");
        for (int t = 0; t < seq.x.length(); ++t) {
            const ObservationSequence w = window_at(seq.x, t, model.window);
            const int truth = seq.y.labels[static_cast<std::size_t>(t)];

            const Eigen::MatrixXd node_base = node_scores(model, w.epochs);
            const WindowScores scores = hcrf_window_scores(model, node_base, true);

            const double lse = chain::log_sum_exp(scores.log_z);
            nll += lse - scores.log_z(truth);
            const Eigen::VectorXd posterior = (scores.log_z.array() - lse).exp();

            for (int l = 0; l < L; ++l) {
                const double coeff = posterior(l) - (l == truth ? 1.0 : 0.0);
                if (coeff == 0.0) continue;
                const auto& marg = scores.margs[static_cast<std::size_t>(l)];
                g_state.noalias() += coeff * (marg.node.transpose() * w.epochs);
                const Eigen::VectorXd occupancy = marg.node.colwise().sum();
                g_bias += coeff * occupancy;
                g_compat.row(l) += coeff * occupancy.transpose();
                for (const auto& e : marg.edge) g_trans += coeff * e;
            }
        }
    }

    nll += 0.5 * model.l2 *
           (model.state.squaredNorm() + model.trans.squaredNorm() + model.bias.squaredNorm() +
            model.compat.squaredNorm());
    g_state += model.l2 * model.state;
    g_trans += model.l2 * model.trans;
    g_bias += model.l2 * model.bias;
    g_compat += model.l2 * model.compat;

    if (!std::isfinite(nll)) throw NumericError("HCRF objective produced non-finite values");

    LatentModel shaped = model;
    shaped.state = g_state;
    shaped.trans = g_trans;
    shaped.bias = g_bias;
    shaped.compat = g_compat;
    return {nll, pack(shaped)};
}

std::pair<double, Eigen::VectorXd> nll_and_gradient(const LatentModel& model, const Dataset& data) {
    if (model.variant == Variant::Hcrf) return hcrf_nll_and_gradient(model, data);
    return ldcrf_nll_and_gradient(model, data);
}

Eigen::MatrixXd ldcrf_label_marginals(const LatentModel& model, const ObservationSequence& x) {
    const chain::ChainMarginals marg = chain::marginals(build_potentials(model, x));
    const int n = x.length();
    const int L = model.num_labels();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, L);
    for (int l = 0; l < L; ++l) {
        out.col(l) = marg.node
                         .middleCols(model.hidden.block_begin(l), model.hidden.per_label)
                         .rowwise()
                         .sum();
    }
    return out;
}

LabelSequence ldcrf_predict(const LatentModel& model, const ObservationSequence& x) {
    const Eigen::MatrixXd marg = ldcrf_label_marginals(model, x);
    LabelSequence y;
    y.labels.resize(static_cast<std::size_t>(x.length()));
    for (int t = 0; t < x.length(); ++t) {
        y.labels[static_cast<std::size_t>(t)] = argmax_smallest(marg.row(t).transpose());
    }
    return y;
}

WindowPosterior hcrf_classify_window(const LatentModel& model, const ObservationSequence& window) {
    if (model.variant != Variant::Hcrf) throw InputError("window classification needs HCRF");
    check_dims(model, window);
    if (window.length() != model.window) {
        throw InputError("window length " + std::to_string(window.length()) + ", expected " +
                         std::to_string(model.window));
    }
    const Eigen::MatrixXd node_base = node_scores(model, window.epochs);
    const WindowScores scores = hcrf_window_scores(model, node_base, false);
    const double lse = chain::log_sum_exp(scores.log_z);
    WindowPosterior out;
    out.posterior = (scores.log_z.array() - lse).exp();
    out.label = argmax_smallest(out.posterior);
    return out;
}

LabelSequence hcrf_predict_sequence(const LatentModel& model, const ObservationSequence& x) {
    check_dims(model, x);
    LabelSequence y;
    y.labels.resize(static_cast<std::size_t>(x.length()));
    for (int t = 0; t < x.length(); ++t) {
        const ObservationSequence w = window_at(x, t, model.window);
        y.labels[static_cast<std::size_t>(t)] = hcrf_classify_window(model, w).label;
    }
    return y;
}

LabelSequence predict(const LatentModel& model, const ObservationSequence& x) {
    if (model.variant == Variant::Hcrf) return hcrf_predict_sequence(model, x);
    return ldcrf_predict(model, x);
}

LatentModel train_latent(const Dataset& data, const TrainConfig& config,
                         optim::OptimResult* opt_info) {
    if (data.num_sequences() == 0) throw TrainingError("cannot train on an empty dataset");
    data.validate();
    if (config.hidden_per_label < 1) throw ConfigError("hidden states per label must be >= 1");
    if (config.variant == Variant::Hcrf && (config.window < 1 || config.window % 2 == 0)) {
        throw ConfigError("HCRF window must be odd and positive");
    }
    if (config.variant == Variant::Ldcnf && config.gates < 1) {
        throw ConfigError("gate count must be at least 1");
    }

    LatentModel model;
    model.variant = config.variant;
    model.alphabet = data.alphabet;
    model.hidden = HiddenMap{data.alphabet.size(), config.hidden_per_label};
    model.window = config.window;
    model.l2 = config.l2;

    const int H = model.num_hidden();
    const int L = model.num_labels();
    const int F = config.variant == Variant::Ldcnf ? config.gates : data.dim;

    Rng rng(derive_seed(config.seed, 17));
    const auto init = [&rng](Eigen::Index rows, Eigen::Index cols, double fan_in) {
        Eigen::MatrixXd w(rows, cols);
        const double scale = 1.0 / std::sqrt(fan_in);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-0.5, 0.5) * scale;
        return w;
    };

    model.state = init(H, F, F);
    model.trans = init(H, H, H);
    model.bias = Eigen::VectorXd::Zero(H);
    if (config.variant == Variant::Hcrf) model.compat = init(L, H, H);
    if (config.variant == Variant::Ldcnf) {
        model.gate = cnf::random_gate_layer(config.gates, data.dim, derive_seed(config.seed, 23));
    }

    LatentModel scratch = model;
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
        throw TrainingError("latent-model training diverged to a non-finite objective");
    }
    unpack(result.x, model);
    if (opt_info) *opt_info = result;
    return model;
}

}  // namespace seqlab::latent
