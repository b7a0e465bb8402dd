#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqlab/error.hpp"

namespace seqlab {

/// Ordered set of distinct label names. Index order is first appearance in
/// the data, never hard-coded: the stage vocabularies of different corpora
/// differ (SWS vs S3), so the alphabet is always data-driven.
class LabelAlphabet {
public:
    LabelAlphabet() = default;
    explicit LabelAlphabet(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int index) const;
    const std::vector<std::string>& names() const { return names_; }
    std::optional<int> find(const std::string& name) const;

    /// Adds a name if new; returns its index either way.
    int add(const std::string& name);

    bool operator==(const LabelAlphabet& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

/// Per-epoch feature vectors of one recording; row n holds epoch n.
struct ObservationSequence {
    std::string id;
    Eigen::MatrixXd epochs;  // n x m

    int length() const { return static_cast<int>(epochs.rows()); }
    int dim() const { return static_cast<int>(epochs.cols()); }
};

/// Stage labels aligned with an ObservationSequence.
struct LabelSequence {
    std::vector<int> labels;

    int length() const { return static_cast<int>(labels.size()); }
    bool operator==(const LabelSequence&) const = default;
};

struct LabeledSequence {
    ObservationSequence x;
    LabelSequence y;
};

struct Dataset {
    std::vector<LabeledSequence> sequences;
    LabelAlphabet alphabet;
    int dim = 0;

    int num_sequences() const { return static_cast<int>(sequences.size()); }
    long total_epochs() const;

    /// Checks the structural invariants: shared feature dimension, aligned
    /// lengths, finite values, label indices within the alphabet.
    void validate() const;

    /// All epochs of the listed sequences stacked into one matrix.
    Eigen::MatrixXd stack_epochs() const;

    Dataset subset(const std::vector<int>& indices) const;
};

bool exact_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
bool operator==(const ObservationSequence& a, const ObservationSequence& b);
bool operator==(const LabeledSequence& a, const LabeledSequence& b);
bool operator==(const Dataset& a, const Dataset& b);

/// Whole-sequence k-fold assignment. Epochs of one recording never split
/// across folds, so evaluation is free of within-sequence leakage.
struct FoldSplit {
    int k = 0;
    std::map<std::string, int> assignment;  // sequence id -> fold

    std::vector<int> test_indices(const Dataset& d, int fold) const;
    std::vector<int> train_indices(const Dataset& d, int fold) const;
};

/// Loads the standard CSV dataset format:
///   sequence_id,epoch_index,f1,...,fm,label
/// Header row is mandatory; rows may appear in any order and are assembled
/// per sequence in epoch_index order; the alphabet follows first appearance.
Dataset load_dataset(const std::string& path);

void save_dataset(const Dataset& d, const std::string& path);

/// Column-wise z-scoring parameters fit on training data only.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // 1 for zero-variance columns
};

Scaler fit_scaler(const Dataset& train);
Dataset apply_scaler(const Scaler& s, const Dataset& d);

/// Fits on `train`, applies to `apply_to`. Held-out data is always shifted
/// and scaled with the training statistics.
std::pair<Dataset, Scaler> standardize(const Dataset& train, const Dataset& apply_to);

/// Deterministic whole-sequence fold assignment; fold sizes differ by at
/// most one. Requires 2 <= k <= number of sequences.
FoldSplit split_folds(const Dataset& d, int k, std::uint64_t seed);

/// Concatenates each epoch with its +-window neighbours (edge epochs are
/// repeated), turning dimension m into m*(2*window+1). window = 0 is the
/// identity.
Dataset expand_context(const Dataset& d, int window);

/// Splits sequences longer than max_len into consecutive segments for
/// training; segment ids get a "#<i>" suffix.
Dataset chunk_sequences(const Dataset& d, int max_len);

}  // namespace seqlab
