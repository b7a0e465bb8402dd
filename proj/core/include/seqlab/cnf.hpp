#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "seqlab/chain.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/optimize.hpp"

namespace seqlab::cnf {

/// Identity exists only so the gated model can be collapsed onto a plain
/// CRF in equivalence tests; production paths always use the logistic.
enum class Activation { Logistic, Identity };

/// K bounded nonlinear transforms of the input features. Row g holds the
/// weights of gate g; the last column is that gate's bias.
struct GateLayer {
    Eigen::MatrixXd weights;  // K x (m+1)
    Activation activation = Activation::Logistic;

    int gates() const { return static_cast<int>(weights.rows()); }
    int input_dim() const { return static_cast<int>(weights.cols()) - 1; }
};

GateLayer random_gate_layer(int gates, int input_dim, std::uint64_t seed);

/// Gate outputs for one epoch; logistic keeps each in (0,1).
Eigen::VectorXd gate_forward(const GateLayer& gate, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Gate outputs for all epochs at once, n x K.
Eigen::MatrixXd gate_forward_all(const GateLayer& gate, const Eigen::MatrixXd& epochs);

/// Conditional Neural Field: CRF whose state features are the K gate
/// outputs instead of the raw feature vector.
struct CnfModel {
    GateLayer gate;
    Eigen::MatrixXd state;  // L x K
    Eigen::MatrixXd trans;  // L x L
    Eigen::VectorXd bias;   // L
    LabelAlphabet alphabet;
    double l2 = 1e-2;

    int num_labels() const { return static_cast<int>(bias.size()); }
    int gates() const { return gate.gates(); }
    int feature_dim() const { return gate.input_dim(); }
};

chain::ChainPotentials build_potentials(const CnfModel& model, const ObservationSequence& x);

// Packed layout: state row-major, trans row-major, bias, gate weights row-major.
int packed_size(int num_labels, int gates, int feature_dim);
Eigen::VectorXd pack(const CnfModel& model);
void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, CnfModel& model);

/// Exact joint gradient: the lambda blocks see the gated features, the gate
/// weights get the chain-rule term through the logistic derivative.
std::pair<double, Eigen::VectorXd> nll_and_gradient(const CnfModel& model, const Dataset& data);

struct TrainConfig {
    int gates = 3;
    double l2 = 1e-2;
    std::uint64_t seed = 1;
    optim::OptimConfig optimizer;
};

CnfModel train(const Dataset& data, const TrainConfig& config = {},
               crf::TrainInfo* info = nullptr);

LabelSequence predict(const CnfModel& model, const ObservationSequence& x);

}  // namespace seqlab::cnf
