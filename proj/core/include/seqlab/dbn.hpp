#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "seqlab/dataset.hpp"
#include "seqlab/optimize.hpp"
#include "seqlab/rng.hpp"

namespace seqlab::dbn {

struct RbmLayer {
    Eigen::MatrixXd weights;  // visible x hidden
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;

    int visible() const { return static_cast<int>(weights.rows()); }
    int hidden() const { return static_cast<int>(weights.cols()); }
};

struct DbnConfig {
    std::vector<int> layer_sizes = {64, 32};
    int epochs = 200;
    double learning_rate = 0.05;
    int minibatch = 32;
    std::uint64_t seed = 1;
    bool backprop = false;  // fine-tune the whole stack rather than the softmax only
    optim::OptimConfig optimizer;
};

/// RBM stack with an optional softmax readout. Until finetune_softmax runs,
/// the model is a pure feature extractor and has no classifier.
struct DbnModel {
    std::vector<RbmLayer> layers;
    // (last hidden dim + 1) x L; the extra row is the class bias. Empty
    // before fine-tuning.
    Eigen::MatrixXd softmax;
    LabelAlphabet alphabet;
    int train_epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;

    bool has_classifier() const { return softmax.size() > 0; }
    int top_dim() const { return layers.empty() ? 0 : layers.back().hidden(); }
};

RbmLayer random_layer(int visible, int hidden, std::uint64_t seed);

/// Hidden activation probabilities, logistic(v W + c); rows are samples.
Eigen::MatrixXd rbm_hidden_probs(const RbmLayer& layer, const Eigen::MatrixXd& v);

/// One contrastive-divergence-1 step on a minibatch; deterministic per seed.
RbmLayer cd1_update(const RbmLayer& layer, const Eigen::MatrixXd& minibatch, double learning_rate,
                    std::uint64_t seed);

void cd1_update_inplace(RbmLayer& layer, const Eigen::MatrixXd& minibatch, double learning_rate,
                        Rng& rng);

/// Mean squared error of the mean-field reconstruction.
double reconstruction_error(const RbmLayer& layer, const Eigen::MatrixXd& v);

/// Greedy layer-wise CD-1 pretraining; layer k trains on the hidden
/// probabilities of layer k-1. No classifier is attached.
DbnModel pretrain(const Eigen::MatrixXd& features, const std::vector<int>& layer_sizes,
                  const DbnConfig& config);

DbnModel pretrain_dataset(const Dataset& d, const DbnConfig& config);

/// Supervised stage: trains the softmax readout on cross-entropy (and the
/// full stack too when config.backprop is set). Sequence structure is
/// ignored; every epoch is one sample.
DbnModel finetune_softmax(const DbnModel& model, const Dataset& data, const DbnConfig& config);

/// Activations of the top hidden layer, rows = samples.
Eigen::MatrixXd stack_forward(const DbnModel& model, const Eigen::MatrixXd& features);

/// Per-sample class probability vectors (rows sum to 1). Needs a classifier.
Eigen::MatrixXd transform(const DbnModel& model, const Eigen::MatrixXd& features);

/// Replaces every epoch's features with its L class probabilities.
Dataset transform_dataset(const DbnModel& model, const Dataset& d);

}  // namespace seqlab::dbn
