#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "seqlab/chain.hpp"
#include "seqlab/cnf.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/optimize.hpp"

namespace seqlab::latent {

enum class Variant { Hcrf, Ldcrf, Ldcnf };

/// Assigns each label a disjoint contiguous block of r hidden states.
struct HiddenMap {
    int num_labels = 0;
    int per_label = 1;

    int total() const { return num_labels * per_label; }
    int block_begin(int label) const { return label * per_label; }
    int block_end(int label) const { return (label + 1) * per_label; }
    int label_of(int hidden) const { return hidden / per_label; }
};

/// Hidden-state sequence model. The weights live on hidden states: state
/// features H x m (H x K when gated), transitions H x H, bias H. The HCRF
/// variant adds label-conditioned compatibility weights L x H; the LDCNF
/// variant adds a gate layer in front of the state features.
struct LatentModel {
    Variant variant = Variant::Ldcrf;
    HiddenMap hidden;
    Eigen::MatrixXd state;
    Eigen::MatrixXd trans;
    Eigen::VectorXd bias;
    Eigen::MatrixXd compat;  // HCRF only
    cnf::GateLayer gate;     // LDCNF only
    int window = 11;         // HCRF only; odd
    LabelAlphabet alphabet;
    double l2 = 1e-2;

    int num_labels() const { return hidden.num_labels; }
    int num_hidden() const { return hidden.total(); }
    int feature_dim() const {
        return variant == Variant::Ldcnf ? gate.input_dim() : static_cast<int>(state.cols());
    }
};

/// Unrestricted hidden-chain potentials (gated for LDCNF).
chain::ChainPotentials build_potentials(const LatentModel& model, const ObservationSequence& x);

/// Masks node potentials to -inf outside each observed label's block,
/// confining paths to label-consistent hidden states.
chain::ChainPotentials restrict_potentials(const chain::ChainPotentials& p, const HiddenMap& map,
                                           const LabelSequence& y);

// Packed layout: state, trans, bias, then compat (HCRF) or gate (LDCNF).
int packed_size(const LatentModel& model);
Eigen::VectorXd pack(const LatentModel& model);
void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, LatentModel& model);

/// nll = -sum_k [log Z_restricted - log Z_full]; gradient is the difference
/// between full and restricted marginal feature counts plus the l2 term.
/// Valid for LDCRF and LDCNF.
std::pair<double, Eigen::VectorXd> ldcrf_nll_and_gradient(const LatentModel& model,
                                                          const Dataset& data);

/// Windowed-classification objective for HCRF: every epoch contributes one
/// centered window; per window, -log softmax over per-label hidden
/// partition scores.
std::pair<double, Eigen::VectorXd> hcrf_nll_and_gradient(const LatentModel& model,
                                                         const Dataset& data);

std::pair<double, Eigen::VectorXd> nll_and_gradient(const LatentModel& model, const Dataset& data);

/// Per-position label marginals (sums of hidden marginals over each label's
/// block), argmax per position, ties to the smallest label.
LabelSequence ldcrf_predict(const LatentModel& model, const ObservationSequence& x);

/// Label marginal table used by ldcrf_predict, n x L; rows sum to 1.
Eigen::MatrixXd ldcrf_label_marginals(const LatentModel& model, const ObservationSequence& x);

struct WindowPosterior {
    int label;
    Eigen::VectorXd posterior;  // over L, sums to 1
};

/// Classifies one window of exactly `model.window` epochs by marginalizing
/// hidden paths per label.
WindowPosterior hcrf_classify_window(const LatentModel& model, const ObservationSequence& window);

/// Labels every epoch with a centered window (edges padded by repetition).
LabelSequence hcrf_predict_sequence(const LatentModel& model, const ObservationSequence& x);

LabelSequence predict(const LatentModel& model, const ObservationSequence& x);

struct TrainConfig {
    Variant variant = Variant::Ldcrf;
    int hidden_per_label = 2;
    int window = 11;  // HCRF
    int gates = 3;    // LDCNF
    double l2 = 1e-2;
    std::uint64_t seed = 1;
    optim::OptimConfig optimizer;
};

/// BFGS on the variant's objective from a seeded random initialization
/// (an all-zero start is a saddle point by hidden-block symmetry).
LatentModel train_latent(const Dataset& data, const TrainConfig& config,
                         optim::OptimResult* opt_info = nullptr);

}  // namespace seqlab::latent
