#include "seqlab/dbn.hpp"

#include <cmath>
#include <limits>

#include "seqlab/chain.hpp"

namespace seqlab::dbn {

namespace {

Eigen::MatrixXd logistic(Eigen::MatrixXd z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_visible(const RbmLayer& layer, const Eigen::MatrixXd& v) {
    if (v.cols() != layer.visible()) {
        throw InputError("visible dimension " + std::to_string(v.cols()) + ", layer expects " +
                         std::to_string(layer.visible()));
    }
}

/// Row-stochastic softmax of a logit matrix, computed via logsumexp.
Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
        const double lse = chain::log_sum_exp(logits.row(i).transpose());
        out.row(i) = (logits.row(i).array() - lse).exp();
    }
    return out;
}

/// Appends a constant-one column so the softmax weights carry a bias row.
Eigen::MatrixXd with_bias_column(const Eigen::MatrixXd& h) {
    Eigen::MatrixXd out(h.rows(), h.cols() + 1);
    out.leftCols(h.cols()) = h;
    out.col(h.cols()).setOnes();
    return out;
}

}  // namespace

RbmLayer random_layer(int visible, int hidden, std::uint64_t seed) {
    if (visible < 1 || hidden < 1) throw ConfigError("RBM layer sizes must be positive");
    RbmLayer layer;
    layer.weights.resize(visible, hidden);
    Rng rng(seed);
    for (int i = 0; i < visible; ++i)
        for (int j = 0; j < hidden; ++j) layer.weights(i, j) = 0.01 * rng.gaussian();
    layer.visible_bias = Eigen::VectorXd::Zero(visible);
    layer.hidden_bias = Eigen::VectorXd::Zero(hidden);
    return layer;
}

Eigen::MatrixXd rbm_hidden_probs(const RbmLayer& layer, const Eigen::MatrixXd& v) {
    check_visible(layer, v);
    Eigen::MatrixXd z = v * layer.weights;
    z.rowwise() += layer.hidden_bias.transpose();
    return logistic(std::move(z));
}

void cd1_update_inplace(RbmLayer& layer, const Eigen::MatrixXd& minibatch, double learning_rate,
                        Rng& rng) {
    check_visible(layer, minibatch);
    if (minibatch.rows() < 1) throw InputError("empty minibatch");
    const auto batch = static_cast<double>(minibatch.rows());

    const Eigen::MatrixXd h0_prob = rbm_hidden_probs(layer, minibatch);
    Eigen::MatrixXd h0_sample(h0_prob.rows(), h0_prob.cols());
    for (int i = 0; i < h0_prob.rows(); ++i)
        for (int j = 0; j < h0_prob.cols(); ++j)
            h0_sample(i, j) = rng.bernoulli(h0_prob(i, j)) ? 1.0 : 0.0;

    Eigen::MatrixXd v1 = h0_sample * layer.weights.transpose();
    v1.rowwise() += layer.visible_bias.transpose();
    v1 = logistic(std::move(v1));
    const Eigen::MatrixXd h1_prob = rbm_hidden_probs(layer, v1);

    const Eigen::MatrixXd grad_w =
        (minibatch.transpose() * h0_prob - v1.transpose() * h1_prob) / batch;
    layer.weights += learning_rate * grad_w;
    layer.visible_bias += learning_rate * (minibatch - v1).colwise().mean().transpose();
    layer.hidden_bias += learning_rate * (h0_prob - h1_prob).colwise().mean().transpose();

    if (!layer.weights.allFinite() || !layer.visible_bias.allFinite() ||
        !layer.hidden_bias.allFinite()) {
        throw NumericError("CD-1 update produced non-finite parameters");
    }
}

RbmLayer cd1_update(const RbmLayer& layer, const Eigen::MatrixXd& minibatch, double learning_rate,
                    std::uint64_t seed) {
    RbmLayer out = layer;
    Rng rng(seed);
    cd1_update_inplace(out, minibatch, learning_rate, rng);
    return out;
}

double reconstruction_error(const RbmLayer& layer, const Eigen::MatrixXd& v) {
    check_visible(layer, v);
    const Eigen::MatrixXd h = rbm_hidden_probs(layer, v);
    Eigen::MatrixXd recon = h * layer.weights.transpose();
    recon.rowwise() += layer.visible_bias.transpose();
    recon = logistic(std::move(recon));
    return (v - recon).array().square().mean();
}

DbnModel pretrain(const Eigen::MatrixXd& features, const std::vector<int>& layer_sizes,
                  const DbnConfig& config) {
    if (layer_sizes.empty()) throw ConfigError("at least one RBM layer size is required");
    if (features.rows() < 1) throw InputError("no training samples");
    if (config.minibatch < 1) throw ConfigError("minibatch size must be positive");

    DbnModel model;
    model.train_epochs = config.epochs;
    model.learning_rate = config.learning_rate;
    model.seed = config.seed;

    Eigen::MatrixXd input = features;
    for (std::size_t li = 0; li < layer_sizes.size(); ++li) {
        RbmLayer layer = random_layer(static_cast<int>(input.cols()), layer_sizes[li],
                                      derive_seed(config.seed, 100 + li));
        Rng rng(derive_seed(config.seed, 200 + li));
        const int n = static_cast<int>(input.rows());
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            rng.shuffle(order);
            for (int start = 0; start < n; start += config.minibatch) {
                const int len = std::min(config.minibatch, n - start);
                Eigen::MatrixXd batch(len, input.cols());
                for (int r = 0; r < len; ++r) {
                    batch.row(r) = input.row(order[static_cast<std::size_t>(start + r)]);
                }
                cd1_update_inplace(layer, batch, config.learning_rate, rng);
            }
        }
        input = rbm_hidden_probs(layer, input);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

DbnModel pretrain_dataset(const Dataset& d, const DbnConfig& config) {
    d.validate();
    DbnModel model = pretrain(d.stack_epochs(), config.layer_sizes, config);
    model.alphabet = d.alphabet;
    return model;
}

Eigen::MatrixXd stack_forward(const DbnModel& model, const Eigen::MatrixXd& features) {
    if (model.layers.empty()) throw StateError("DBN has no pretrained layers");
    Eigen::MatrixXd a = features;
    for (const auto& layer : model.layers) a = rbm_hidden_probs(layer, a);
    return a;
}

namespace {

/// Cross-entropy of softmax(H W) against labels; gradient w.r.t. W.
double softmax_nll(const Eigen::MatrixXd& hidden, const std::vector<int>& labels,
                   const Eigen::MatrixXd& w, Eigen::MatrixXd& grad) {
    const Eigen::MatrixXd logits = hidden * w;
    double nll = 0.0;
    Eigen::MatrixXd delta(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
        const double lse = chain::log_sum_exp(logits.row(i).transpose());
        nll += lse - logits(i, labels[static_cast<std::size_t>(i)]);
        delta.row(i) = (logits.row(i).array() - lse).exp();
        delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    grad = hidden.transpose() * delta;
    return nll;
}

}  // namespace

DbnModel finetune_softmax(const DbnModel& model, const Dataset& data, const DbnConfig& config) {
    if (model.layers.empty()) throw StateError("DBN must be pretrained before fine-tuning");
    data.validate();
    if (data.num_sequences() == 0) throw TrainingError("cannot fine-tune on an empty dataset");

    const int L = data.alphabet.size();
    const Eigen::MatrixXd features = data.stack_epochs();
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(data.total_epochs()));
    for (const auto& seq : data.sequences) {
        labels.insert(labels.end(), seq.y.labels.begin(), seq.y.labels.end());
    }

    DbnModel out = model;
    out.alphabet = data.alphabet;

    if (!config.backprop) {
        const Eigen::MatrixXd hidden = with_bias_column(stack_forward(model, features));
        const int d = static_cast<int>(hidden.cols());
        const optim::Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            const Eigen::Map<const Eigen::MatrixXd> w(v.data(), d, L);
            Eigen::MatrixXd grad;
            const double nll = softmax_nll(hidden, labels, w, grad);
            g = Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
            return nll;
        };
        const optim::OptimResult result =
            optim::minimize(objective, Eigen::VectorXd::Zero(d * L), config.optimizer);
        if (!std::isfinite(result.value)) throw TrainingError("softmax fine-tuning diverged");
        out.softmax = Eigen::Map<const Eigen::MatrixXd>(result.x.data(), d, L);
        return out;
    }

    // Full backprop through the stack. Parameters: per-layer weights and
    // hidden biases (visible biases only matter for reconstruction), then
    // the softmax readout.
    long total = 0;
    for (const auto& layer : model.layers) total += layer.weights.size() + layer.hidden_bias.size();
    total += static_cast<long>(model.top_dim() + 1) * L;

    Eigen::VectorXd x0(total);
    {
        long at = 0;
        for (const auto& layer : model.layers) {
            std::copy(layer.weights.data(), layer.weights.data() + layer.weights.size(),
                      x0.data() + at);
            at += layer.weights.size();
            std::copy(layer.hidden_bias.data(), layer.hidden_bias.data() + layer.hidden_bias.size(),
                      x0.data() + at);
            at += layer.hidden_bias.size();
        }
        x0.segment(at, static_cast<long>(model.top_dim() + 1) * L).setZero();
    }

    DbnModel scratch = out;
    const optim::Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        long at = 0;
        for (auto& layer : scratch.layers) {
            layer.weights = Eigen::Map<const Eigen::MatrixXd>(v.data() + at, layer.weights.rows(),
                                                              layer.weights.cols());
            at += layer.weights.size();
            layer.hidden_bias =
                Eigen::Map<const Eigen::VectorXd>(v.data() + at, layer.hidden_bias.size());
            at += layer.hidden_bias.size();
        }
        const Eigen::Map<const Eigen::MatrixXd> w_top(v.data() + at, scratch.top_dim() + 1, L);

        // forward pass, keeping activations
        std::vector<Eigen::MatrixXd> acts;
        acts.reserve(scratch.layers.size() + 1);
        acts.push_back(features);
        for (const auto& layer : scratch.layers) acts.push_back(rbm_hidden_probs(layer, acts.back()));
        const Eigen::MatrixXd top = with_bias_column(acts.back());

        Eigen::MatrixXd grad_top;
        const double nll = softmax_nll(top, labels, w_top, grad_top);

        // backward pass
        g.resize(v.size());
        const Eigen::MatrixXd logits = top * w_top;
        Eigen::MatrixXd delta(logits.rows(), logits.cols());
        for (int i = 0; i < logits.rows(); ++i) {
            const double lse = chain::log_sum_exp(logits.row(i).transpose());
            delta.row(i) = (logits.row(i).array() - lse).exp();
            delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
        }
        // the bias row does not feed back into the stack
        Eigen::MatrixXd back = delta * w_top.topRows(scratch.top_dim()).transpose();
        std::vector<Eigen::MatrixXd> grad_w(scratch.layers.size());
        std::vector<Eigen::VectorXd> grad_c(scratch.layers.size());
        for (int li = static_cast<int>(scratch.layers.size()) - 1; li >= 0; --li) {
            const auto& a_out = acts[static_cast<std::size_t>(li) + 1];
            const auto& a_in = acts[static_cast<std::size_t>(li)];
            back.array() *= a_out.array() * (1.0 - a_out.array());
            grad_w[static_cast<std::size_t>(li)] = a_in.transpose() * back;
            grad_c[static_cast<std::size_t>(li)] = back.colwise().sum();
            if (li > 0) back = back * scratch.layers[static_cast<std::size_t>(li)].weights.transpose();
        }
        at = 0;
        for (std::size_t li = 0; li < scratch.layers.size(); ++li) {
            std::copy(grad_w[li].data(), grad_w[li].data() + grad_w[li].size(), g.data() + at);
            at += grad_w[li].size();
            std::copy(grad_c[li].data(), grad_c[li].data() + grad_c[li].size(), g.data() + at);
            at += grad_c[li].size();
        }
        std::copy(grad_top.data(), grad_top.data() + grad_top.size(), g.data() + at);
        return nll;
    };

    const optim::OptimResult result = optim::minimize(objective, x0, config.optimizer);
    if (!std::isfinite(result.value)) throw TrainingError("backprop fine-tuning diverged");
    {
        long at = 0;
        for (auto& layer : out.layers) {
            layer.weights = Eigen::Map<const Eigen::MatrixXd>(result.x.data() + at,
                                                              layer.weights.rows(),
                                                              layer.weights.cols());
            at += layer.weights.size();
            layer.hidden_bias =
                Eigen::Map<const Eigen::VectorXd>(result.x.data() + at, layer.hidden_bias.size());
            at += layer.hidden_bias.size();
        }
        out.softmax =
            Eigen::Map<const Eigen::MatrixXd>(result.x.data() + at, out.top_dim() + 1, L);
    }
    return out;
}

Eigen::MatrixXd transform(const DbnModel& model, const Eigen::MatrixXd& features) {
    if (!model.has_classifier()) {
        throw StateError("DBN has no trained classifier; run the supervised stage first");
    }
    return row_softmax(with_bias_column(stack_forward(model, features)) * model.softmax);
}

Dataset transform_dataset(const DbnModel& model, const Dataset& d) {
    Dataset out;
    out.alphabet = d.alphabet;
    out.dim = static_cast<int>(model.softmax.cols());
    out.sequences.reserve(d.sequences.size());
    for (const auto& seq : d.sequences) {
        LabeledSequence s;
        s.x.id = seq.x.id;
        s.x.epochs = transform(model, seq.x.epochs);
        s.y = seq.y;
        out.sequences.push_back(std::move(s));
    }
    return out;
}

}  // namespace seqlab::dbn
