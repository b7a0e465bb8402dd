#include "seqlab/fcm.hpp"

#include <cmath>
#include <limits>

#include "seqlab/rng.hpp"

namespace seqlab::fcm {

namespace {

void check_config(const FcmConfig& config) {
    if (config.clusters < 1) throw ConfigError("cluster count must be at least 1");
    if (!(config.fuzziness > 1.0)) throw ConfigError("fuzziness must be greater than 1");
    if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (config.max_iterations < 1) throw ConfigError("max iterations must be at least 1");
}

/// n x c matrix of Euclidean distances to the centroids.
Eigen::MatrixXd distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V) {
    Eigen::MatrixXd d(X.rows(), V.rows());
    for (int k = 0; k < V.rows(); ++k) {
        d.col(k) = (X.rowwise() - V.row(k)).rowwise().norm();
    }
    return d;
}

/// Centroid update that reports degenerate clusters instead of throwing.
Eigen::MatrixXd centroids_with_mask(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, double w,
                                    std::vector<int>* degenerate) {
    const Eigen::MatrixXd Uw = U.array().pow(w);
    const Eigen::VectorXd mass = Uw.colwise().sum();
    Eigen::MatrixXd V(U.cols(), X.cols());
    for (int k = 0; k < U.cols(); ++k) {
        if (mass(k) > 0.0) {
            V.row(k) = (Uw.col(k).transpose() * X) / mass(k);
        } else {
            V.row(k).setZero();
            if (degenerate) degenerate->push_back(k);
        }
    }
    return V;
}

}  // namespace

Eigen::MatrixXd init_partition(int n, int c, std::uint64_t seed) {
    if (c < 1) throw ConfigError("cluster count must be at least 1");
    if (n < c) {
        throw ConfigError("cannot form " + std::to_string(c) + " clusters from " +
                          std::to_string(n) + " points");
    }
    Rng rng(seed);
    Eigen::MatrixXd U(n, c);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < c; ++k) U(i, k) = rng.open01();
        U.row(i) /= U.row(i).sum();
    }
    return U;
}

Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, double w) {
    if (X.rows() != U.rows()) throw InputError("membership rows must match data rows");
    std::vector<int> degenerate;
    Eigen::MatrixXd V = centroids_with_mask(X, U, w, &degenerate);
    if (!degenerate.empty()) {
        throw TrainingError("cluster " + std::to_string(degenerate.front()) +
                            " has zero membership mass");
    }
    return V;
}

double objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                 double w) {
    if (X.rows() != U.rows() || U.cols() != V.rows() || X.cols() != V.cols()) {
        throw InputError("inconsistent shapes in objective");
    }
    const Eigen::MatrixXd d = distances(X, V);
    return (d.array().square() * U.array().pow(w)).sum();
}

Eigen::MatrixXd update_partition(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V, double w) {
    if (X.cols() != V.cols()) throw InputError("data and centroid dimensions differ");
    if (!(w > 1.0)) throw ConfigError("fuzziness must be greater than 1");
    const int n = static_cast<int>(X.rows());
    const int c = static_cast<int>(V.rows());
    const Eigen::MatrixXd d = distances(X, V);
    const double exponent = 2.0 / (w - 1.0);

    Eigen::MatrixXd U(n, c);
    for (int i = 0; i < n; ++i) {
        int zero_at = -1;
        for (int k = 0; k < c; ++k) {
            if (d(i, k) == 0.0) {
                zero_at = k;
                break;
            }
        }
        if (zero_at >= 0) {
            U.row(i).setZero();
            U(i, zero_at) = 1.0;
            continue;
        }
        for (int k = 0; k < c; ++k) {
            double denom = 0.0;
            for (int j = 0; j < c; ++j) {
                denom += std::pow(d(i, k) / d(i, j), exponent);
            }
            U(i, k) = 1.0 / denom;  // denom >= 1, overflow collapses to 0
        }
    }
    return U;
}

FuzzyPartition fit(const Eigen::MatrixXd& X, const FcmConfig& config) {
    check_config(config);
    const int n = static_cast<int>(X.rows());
    if (n < config.clusters) {
        throw ConfigError("cannot form " + std::to_string(config.clusters) + " clusters from " +
                          std::to_string(n) + " points");
    }

    FuzzyPartition part;
    part.fuzziness = config.fuzziness;
    part.memberships = init_partition(n, config.clusters, config.seed);

    bool reseeded_once = false;
    double prev_objective = std::numeric_limits<double>::quiet_NaN();
    for (int t = 1; t <= config.max_iterations; ++t) {
        std::vector<int> degenerate;
        part.centroids = centroids_with_mask(X, part.memberships, config.fuzziness, &degenerate);
        if (!degenerate.empty()) {
            if (reseeded_once) {
                throw TrainingError("degenerate cluster persisted after reseeding");
            }
            reseeded_once = true;
            // reseed each empty cluster at the point farthest from the others
            Eigen::MatrixXd live = part.centroids;
            for (int k : degenerate) {
                const Eigen::MatrixXd d = distances(X, live);
                Eigen::Index far_row = 0;
                d.rowwise().minCoeff().maxCoeff(&far_row);
                part.centroids.row(k) = X.row(far_row);
                live.row(k) = X.row(far_row);
            }
        }
        const double p_t = objective(X, part.memberships, part.centroids, config.fuzziness);
        part.objective_history.push_back(p_t);
        part.memberships = update_partition(X, part.centroids, config.fuzziness);
        part.iterations = t;
        if (t >= 2 && std::abs(p_t - prev_objective) < config.tolerance) break;
        prev_objective = p_t;
    }
    return part;
}

Eigen::MatrixXd transform(const FuzzyPartition& partition, const Eigen::MatrixXd& X) {
    if (partition.centroids.size() == 0) throw StateError("partition has no trained centroids");
    if (X.cols() != partition.centroids.cols()) {
        throw InputError("data dimension " + std::to_string(X.cols()) +
                         " does not match centroid dimension " +
                         std::to_string(partition.centroids.cols()));
    }
    return update_partition(X, partition.centroids, partition.fuzziness);
}

FuzzyPartition fit_dataset(const Dataset& d, const FcmConfig& config) {
    d.validate();
    return fit(d.stack_epochs(), config);
}

Dataset transform_dataset(const FuzzyPartition& partition, const Dataset& d) {
    Dataset out;
    out.alphabet = d.alphabet;
    out.dim = static_cast<int>(partition.centroids.rows());
    out.sequences.reserve(d.sequences.size());
    for (const auto& seq : d.sequences) {
        LabeledSequence s;
        s.x.id = seq.x.id;
        s.x.epochs = transform(partition, seq.x.epochs);
        s.y = seq.y;
        out.sequences.push_back(std::move(s));
    }
    return out;
}

}  // namespace seqlab::fcm
