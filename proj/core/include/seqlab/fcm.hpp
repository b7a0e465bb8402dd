#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "seqlab/dataset.hpp"

namespace seqlab::fcm {

struct FcmConfig {
    int clusters = 5;
    double fuzziness = 1.05;  // w > 1; lower is harder
    double tolerance = 1e-6;  // stop when |P_t - P_{t-1}| drops below this
    int max_iterations = 500;
    std::uint64_t seed = 1;
};

/// Result of a fuzzy C-means run. memberships is row-stochastic; the
/// objective history is non-increasing.
struct FuzzyPartition {
    Eigen::MatrixXd memberships;  // n x c
    Eigen::MatrixXd centroids;    // c x m
    std::vector<double> objective_history;
    int iterations = 0;
    double fuzziness = 2.0;
};

/// Seeded random membership matrix, rows normalized to sum 1.
Eigen::MatrixXd init_partition(int n, int c, std::uint64_t seed);

/// V_kj = sum_i U_ik^w X_ij / sum_i U_ik^w. A cluster with zero total
/// membership mass is degenerate and raises TrainingError.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, double w);

/// P = sum_i sum_k ||x_i - v_k||^2 * U_ik^w.
double objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                 double w);

/// U_ik = 1 / sum_j (d_ik / d_ij)^(2/(w-1)) over Euclidean distances d; a
/// point coinciding with a centroid gets an indicator row on the nearest
/// zero-distance centroid.
Eigen::MatrixXd update_partition(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V, double w);

/// Alternating optimization of centroids and memberships until the
/// objective change falls below tolerance or max_iterations pass.
FuzzyPartition fit(const Eigen::MatrixXd& X, const FcmConfig& config);

/// Membership features for new points from trained centroids; rows sum to 1.
Eigen::MatrixXd transform(const FuzzyPartition& partition, const Eigen::MatrixXd& X);

/// Fits on all epochs of a dataset stacked together (unsupervised).
FuzzyPartition fit_dataset(const Dataset& d, const FcmConfig& config);

/// Replaces every epoch's features with its c membership degrees.
Dataset transform_dataset(const FuzzyPartition& partition, const Dataset& d);

}  // namespace seqlab::fcm
