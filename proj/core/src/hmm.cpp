#include "seqlab/hmm.hpp"

#include <cmath>

namespace seqlab::hmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dims(const HmmModel& model, const ObservationSequence& x) {
    if (x.dim() != model.feature_dim()) {
        throw InputError("observation dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(model.feature_dim()));
    }
    if (x.length() < 1) throw InputError("empty observation sequence");
}

/// n x L matrix of diagonal-Gaussian log densities.
Eigen::MatrixXd emission_log_density(const HmmModel& model, const Eigen::MatrixXd& epochs) {
    const int n = static_cast<int>(epochs.rows());
    const int L = model.num_labels();
    Eigen::MatrixXd out(n, L);
    for (int l = 0; l < L; ++l) {
        const auto mu = model.mean.row(l);
        const auto var = model.var.row(l);
        const double log_norm =
            -0.5 * (model.feature_dim() * kLog2Pi + var.array().log().sum());
        out.col(l) = ((epochs.rowwise() - mu).array().square().rowwise() / (2.0 * var.array()))
                         .rowwise()
                         .sum();
        out.col(l) = log_norm - out.col(l).array();
    }
    return out;
}

}  // namespace

HmmModel fit_supervised(const Dataset& data) {
    data.validate();
    if (data.num_sequences() == 0) throw TrainingError("cannot fit HMM on an empty dataset");
    const int L = data.alphabet.size();
    const int m = data.dim;

    Eigen::VectorXd label_count = Eigen::VectorXd::Zero(L);
    Eigen::VectorXd start_count = Eigen::VectorXd::Zero(L);
    Eigen::MatrixXd trans_count = Eigen::MatrixXd::Zero(L, L);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(L, m);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(L, m);

    for (const auto& seq : data.sequences) {
        start_count(seq.y.labels.front()) += 1.0;
        const int n = seq.x.length();
        for (int t = 0; t < n; ++t) {
            const int l = seq.y.labels[static_cast<std::size_t>(t)];
            label_count(l) += 1.0;
            sum.row(l) += seq.x.epochs.row(t);
            sum_sq.row(l) += seq.x.epochs.row(t).array().square().matrix();
        }
        for (int t = 0; t + 1 < n; ++t) {
            trans_count(seq.y.labels[static_cast<std::size_t>(t)],
                        seq.y.labels[static_cast<std::size_t>(t + 1)]) += 1.0;
        }
    }

    for (int l = 0; l < L; ++l) {
        if (label_count(l) == 0.0) {
            throw TrainingError("label '" + data.alphabet.name(l) + "' never occurs in the data");
        }
    }

    HmmModel model;
    model.alphabet = data.alphabet;
    model.initial = (start_count.array() + 1.0) / (start_count.sum() + L);
    model.trans.resize(L, L);
    for (int a = 0; a < L; ++a) {
        model.trans.row(a) = (trans_count.row(a).array() + 1.0) / (trans_count.row(a).sum() + L);
    }
    model.mean.resize(L, m);
    model.var.resize(L, m);
    for (int l = 0; l < L; ++l) {
        model.mean.row(l) = sum.row(l) / label_count(l);
        model.var.row(l) = (sum_sq.row(l) / label_count(l)).array() -
                           model.mean.row(l).array().square();
        model.var.row(l) = model.var.row(l).cwiseMax(kVarFloor);
    }
    return model;
}

chain::ChainPotentials build_potentials(const HmmModel& model, const ObservationSequence& x) {
    check_dims(model, x);
    chain::ChainPotentials p;
    p.node = emission_log_density(model, x.epochs);
    p.node.row(0) += model.initial.array().log().matrix().transpose();
    p.edge = model.trans.array().log();
    return p;
}

LabelSequence decode(const HmmModel& model, const ObservationSequence& x) {
    const chain::ViterbiResult v = chain::viterbi(build_potentials(model, x));
    return LabelSequence{v.path};
}

double loglik(const HmmModel& model, const ObservationSequence& x) {
    return chain::log_forward(build_potentials(model, x)).log_partition;
}

}  // namespace seqlab::hmm
