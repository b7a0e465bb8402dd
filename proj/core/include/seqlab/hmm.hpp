#pragma once

#include <Eigen/Dense>

#include "seqlab/chain.hpp"
#include "seqlab/dataset.hpp"

namespace seqlab::hmm {

/// Gaussian-emission HMM with diagonal covariance.
struct HmmModel {
    Eigen::VectorXd initial;  // L, sums to 1
    Eigen::MatrixXd trans;    // L x L, rows sum to 1
    Eigen::MatrixXd mean;     // L x m
    Eigen::MatrixXd var;      // L x m, floored at kVarFloor
    LabelAlphabet alphabet;

    int num_labels() const { return static_cast<int>(initial.size()); }
    int feature_dim() const { return static_cast<int>(mean.cols()); }
};

inline constexpr double kVarFloor = 1e-6;

/// Closed-form supervised estimation: add-one smoothed initial and
/// transition counts, per-label sample mean and variance. Every label in
/// the alphabet must occur at least once.
HmmModel fit_supervised(const Dataset& data);

/// Log-space chain: node scores are Gaussian log densities (plus log pi at
/// position 0), edges log transitions.
chain::ChainPotentials build_potentials(const HmmModel& model, const ObservationSequence& x);

LabelSequence decode(const HmmModel& model, const ObservationSequence& x);

/// Forward log-likelihood log p(x) of the observations.
double loglik(const HmmModel& model, const ObservationSequence& x);

}  // namespace seqlab::hmm
