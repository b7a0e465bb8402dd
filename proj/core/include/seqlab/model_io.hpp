#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "seqlab/cnf.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/hmm.hpp"
#include "seqlab/latent.hpp"

namespace seqlab::io {

/// Versioned textual key-value model dump. Layout: a header line, the model
/// kind, the label alphabet, scalar fields, then named weight blocks written
/// row-major with full round-trip precision.
struct ModelFile {
    int version = 1;
    std::string kind;
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, std::string>> scalars;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks;

    void set_scalar(const std::string& key, const std::string& value);
    const std::string& scalar(const std::string& key) const;
    bool has_scalar(const std::string& key) const;
    void set_block(const std::string& name, Eigen::MatrixXd m);
    const Eigen::MatrixXd& block(const std::string& name) const;
    bool has_block(const std::string& name) const;
};

void write_model_file(const ModelFile& f, const std::string& path);
ModelFile read_model_file(const std::string& path);

using AnyModel = std::variant<crf::CrfModel, cnf::CnfModel, latent::LatentModel, hmm::HmmModel>;

/// A model bundled with the optional feature scaler it was trained behind;
/// prediction re-applies the scaler so train/predict stay consistent.
struct SavedModel {
    AnyModel model;
    std::optional<Scaler> scaler;
};

void save_model(const SavedModel& m, const std::string& path);
SavedModel load_model(const std::string& path);

std::string kind_of(const AnyModel& m);
const LabelAlphabet& alphabet_of(const AnyModel& m);

/// Applies the stored scaler (if any) and decodes.
LabelSequence predict(const SavedModel& m, const ObservationSequence& x);

}  // namespace seqlab::io
