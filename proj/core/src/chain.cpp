#include "seqlab/chain.hpp"

#include <cmath>
#include <limits>

#include "seqlab/error.hpp"

namespace seqlab::chain {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_potentials(const ChainPotentials& p) {
    if (p.node.rows() < 1 || p.node.cols() < 1) {
        throw InputError("chain potentials need n >= 1 and S >= 1");
    }
    if (p.edge.rows() != p.node.cols() || p.edge.cols() != p.node.cols()) {
        throw InputError("edge potentials must be S x S");
    }
    // -inf marks an excluded state; NaN and +inf are always invalid
    if (p.node.hasNaN() || p.edge.hasNaN() ||
        (p.node.array() == std::numeric_limits<double>::infinity()).any() ||
        !p.edge.allFinite()) {
        throw InputError("chain potentials contain NaN or +inf entries");
    }
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf (or an invalid +inf upstream)
    return m + std::log((v.array() - m).exp().sum());
}

ForwardResult log_forward(const ChainPotentials& p) {
    check_potentials(p);
    const int n = p.length();
    const int S = p.states();
    Eigen::MatrixXd alpha(n, S);
    alpha.row(0) = p.node.row(0);
    Eigen::VectorXd scratch(S);
    for (int t = 1; t < n; ++t) {
        for (int s = 0; s < S; ++s) {
            scratch = alpha.row(t - 1).transpose() + p.edge.col(s);
            alpha(t, s) = p.node(t, s) + log_sum_exp(scratch);
        }
    }
    return {log_sum_exp(alpha.row(n - 1).transpose()), std::move(alpha)};
}

Eigen::MatrixXd log_backward(const ChainPotentials& p) {
    check_potentials(p);
    const int n = p.length();
    const int S = p.states();
    Eigen::MatrixXd beta(n, S);
    beta.row(n - 1).setZero();
    Eigen::VectorXd scratch(S);
    for (int t = n - 2; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            scratch = p.edge.row(s).transpose() + p.node.row(t + 1).transpose() +
                      beta.row(t + 1).transpose();
            beta(t, s) = log_sum_exp(scratch);
        }
    }
    return beta;
}

ChainMarginals marginals(const ChainPotentials& p) {
    const ForwardResult fwd = log_forward(p);
    const Eigen::MatrixXd beta = log_backward(p);
    const int n = p.length();
    const int S = p.states();
    if (!std::isfinite(fwd.log_partition)) {
        throw NumericError("chain partition function vanished; marginals undefined");
    }

    ChainMarginals out;
    out.log_partition = fwd.log_partition;
    out.node = (fwd.alpha + beta).array() - fwd.log_partition;
    out.node = out.node.array().exp();

    out.edge.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    for (int t = 0; t + 1 < n; ++t) {
        Eigen::MatrixXd e(S, S);
        for (int a = 0; a < S; ++a) {
            for (int b = 0; b < S; ++b) {
                e(a, b) = std::exp(fwd.alpha(t, a) + p.edge(a, b) + p.node(t + 1, b) +
                                   beta(t + 1, b) - fwd.log_partition);
            }
        }
        out.edge.push_back(std::move(e));
    }
    return out;
}

ViterbiResult viterbi(const ChainPotentials& p) {
    check_potentials(p);
    const int n = p.length();
    const int S = p.states();
    Eigen::MatrixXd delta(n, S);
    Eigen::MatrixXi back(n, S);
    delta.row(0) = p.node.row(0);
    back.row(0).setZero();

    for (int t = 1; t < n; ++t) {
        for (int s = 0; s < S; ++s) {
            int best_prev = 0;
            double best = delta(t - 1, 0) + p.edge(0, s);
            for (int q = 1; q < S; ++q) {
                const double cand = delta(t - 1, q) + p.edge(q, s);
                if (cand > best) {  // strict: ties keep the smallest index
                    best = cand;
                    best_prev = q;
                }
            }
            delta(t, s) = p.node(t, s) + best;
            back(t, s) = best_prev;
        }
    }

    int last = 0;
    double best = delta(n - 1, 0);
    for (int s = 1; s < S; ++s) {
        if (delta(n - 1, s) > best) {
            best = delta(n - 1, s);
            last = s;
        }
    }

    ViterbiResult out;
    out.score = best;
    out.path.assign(static_cast<std::size_t>(n), 0);
    out.path[static_cast<std::size_t>(n - 1)] = last;
    for (int t = n - 1; t > 0; --t) {
        last = back(t, last);
        out.path[static_cast<std::size_t>(t - 1)] = last;
    }
    return out;
}

double brute_force_log_partition(const ChainPotentials& p) {
    check_potentials(p);
    const int n = p.length();
    const int S = p.states();
    double paths = 1.0;
    for (int t = 0; t < n; ++t) {
        paths *= S;
        if (paths > 1e6) {
            throw InputError("instance too large for enumeration: S^n exceeds 10^6");
        }
    }

    std::vector<int> path(static_cast<std::size_t>(n), 0);
    double max_score = kNegInf;
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(paths));
    while (true) {
        double score = p.node(0, path[0]);
        for (int t = 1; t < n; ++t) {
            score += p.edge(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]) +
                     p.node(t, path[static_cast<std::size_t>(t)]);
        }
        scores.push_back(score);
        max_score = std::max(max_score, score);

        int pos = n - 1;
        while (pos >= 0 && ++path[static_cast<std::size_t>(pos)] == S) {
            path[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    if (!std::isfinite(max_score)) return kNegInf;
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - max_score);
    return max_score + std::log(sum);
}

}  // namespace seqlab::chain
