#pragma once

#include <Eigen/Dense>
#include <vector>

namespace seqlab::chain {

/// Log-space scores of a linear chain. node(n, s) is the score of state s at
/// position n; edge(s, s') the position-independent transition score from s
/// to s'. Node entries may be -inf to exclude a state at a position (the
/// latent-variable models restrict hidden paths this way); NaN and +inf are
/// invalid anywhere.
struct ChainPotentials {
    Eigen::MatrixXd node;  // n x S
    Eigen::MatrixXd edge;  // S x S

    int length() const { return static_cast<int>(node.rows()); }
    int states() const { return static_cast<int>(node.cols()); }
};

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

struct ForwardResult {
    double log_partition;
    Eigen::MatrixXd alpha;  // n x S
};

/// Forward recursion in log space. log_partition is the log of the sum of
/// exp(path score) over all S^n state paths; safe for |score| <= 700.
ForwardResult log_forward(const ChainPotentials& p);

/// Backward table; combining with alpha at any position reproduces the
/// log partition.
Eigen::MatrixXd log_backward(const ChainPotentials& p);

struct ChainMarginals {
    double log_partition;
    Eigen::MatrixXd node;               // n x S, rows sum to 1
    std::vector<Eigen::MatrixXd> edge;  // n-1 matrices of S x S
};

ChainMarginals marginals(const ChainPotentials& p);

struct ViterbiResult {
    std::vector<int> path;
    double score;
};

/// Highest-scoring state path; ties broken toward the smallest state index
/// at every backtrack step.
ViterbiResult viterbi(const ChainPotentials& p);

/// Exact enumeration over all S^n paths; requires S^n <= 10^6. Exists as an
/// independent check of the dynamic-programming routines.
double brute_force_log_partition(const ChainPotentials& p);

}  // namespace seqlab::chain
