#pragma once

#include <Eigen/Dense>
#include <utility>

#include "seqlab/chain.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/optimize.hpp"

namespace seqlab::crf {

/// Linear-chain CRF: per-label linear state features over the raw feature
/// vector, label-pair transition weights, per-label bias.
struct CrfModel {
    Eigen::MatrixXd state;  // L x m
    Eigen::MatrixXd trans;  // L x L
    Eigen::VectorXd bias;   // L
    LabelAlphabet alphabet;
    double l2 = 1e-2;

    int num_labels() const { return static_cast<int>(bias.size()); }
    int feature_dim() const { return static_cast<int>(state.cols()); }
};

CrfModel zero_model(const LabelAlphabet& alphabet, int feature_dim, double l2 = 1e-2);

/// Unnormalized log score of a labeling:
/// sum_n [bias(y_n) + state(y_n).x_n] + sum_n trans(y_n, y_{n+1}).
double score_sequence(const CrfModel& model, const ObservationSequence& x, const LabelSequence& y);

chain::ChainPotentials build_potentials(const CrfModel& model, const ObservationSequence& x);

// Packed parameter layout: state row-major, trans row-major, bias.
int packed_size(int num_labels, int feature_dim);
Eigen::VectorXd pack(const CrfModel& model);
void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, CrfModel& model);

/// Regularized negative log-likelihood and its exact gradient:
/// nll = -sum_k log p(Y_k|X_k) + (l2/2)||w||^2, gradient in packed layout.
std::pair<double, Eigen::VectorXd> nll_and_gradient(const CrfModel& model, const Dataset& data);

struct TrainConfig {
    double l2 = 1e-2;
    optim::OptimConfig optimizer;
};

struct TrainInfo {
    optim::OptimResult opt;
};

CrfModel train(const Dataset& data, const TrainConfig& config = {}, TrainInfo* info = nullptr);

/// Viterbi decode of the model potentials; ties go to the smallest label.
LabelSequence predict(const CrfModel& model, const ObservationSequence& x);

}  // namespace seqlab::crf
