#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "seqlab/dataset.hpp"
#include "seqlab/dbn.hpp"
#include "seqlab/fcm.hpp"
#include "seqlab/hmm.hpp"
#include "seqlab/optimize.hpp"

namespace seqlab::bench {

enum class Scenario { Raw, Dbn, Fcm };
enum class ModelKind { Crf, Cnf, Hcrf, Ldcrf, Ldcnf, Hmm };

Scenario scenario_from_name(const std::string& name);
ModelKind model_from_name(const std::string& name);
const char* scenario_name(Scenario s);
const char* model_name(ModelKind m);

struct ExperimentConfig {
    Scenario scenario = Scenario::Raw;
    ModelKind model = ModelKind::Crf;
    int folds = 10;
    std::uint64_t seed = 1;
    std::string dataset_path;

    // model hyperparameters
    int gates = 3;
    int hidden_per_label = 2;
    int hcrf_window = 11;
    double l2 = 1e-2;
    int context_window = 0;
    int max_segment = 1000;
    optim::OptimConfig optimizer;

    // extractor hyperparameters
    fcm::FcmConfig fcm;
    dbn::DbnConfig dbn;
};

struct FoldRow {
    int fold;  // 1-based for display
    double accuracy_pct;
    double time_hours;
};

/// Cross-validation report mirroring the fold/average table layout used in
/// the result tables: per-fold accuracy and wall-clock columns, an average
/// row, plus the aggregated confusion matrix and the configuration echo.
struct CvReport {
    std::vector<FoldRow> folds;
    double mean_accuracy_pct = 0.0;
    double mean_time_hours = 0.0;
    Eigen::MatrixXi confusion;  // rows = truth, cols = predicted
    std::vector<std::string> labels;
    std::vector<std::string> config_echo;  // "key=value" lines
};

struct Evaluation {
    double accuracy_pct = 0.0;
    Eigen::MatrixXi confusion;
};

/// Per-epoch accuracy in percent plus the confusion matrix.
Evaluation evaluate(const std::vector<LabelSequence>& predicted,
                    const std::vector<LabelSequence>& truth, int num_labels);

/// Arithmetic mean of per-fold values. Display rounding is half-up to two
/// decimals (format_round2), matching the printed tables.
double aggregate_folds(const std::vector<double>& fold_values);

struct SynthConfig {
    int states = 5;
    int dim = 8;
    int sequences = 10;
    int length = 200;
    double separation = 2.0;        // pairwise distance between emission means
    double self_transition = 0.9;   // stage persistence
    std::uint64_t seed = 1;
};

struct SynthResult {
    Dataset data;
    hmm::HmmModel generator;  // true parameters, usable as a decoding oracle
};

/// Samples label paths from a seeded self-transition-biased chain and emits
/// unit-variance Gaussian features around separated per-label means.
SynthResult generate_synth(const SynthConfig& config);

/// One fold of the pipeline: standardize on the training split, fit the
/// scenario's extractor on the training split only, transform both splits,
/// train the model, decode the test split.
struct FoldOutcome {
    Eigen::VectorXd model_weights;  // packed trained parameters
    std::vector<LabelSequence> predictions;
    Evaluation eval;
    double seconds = 0.0;
};

FoldOutcome run_fold(const ExperimentConfig& config, const Dataset& data, const FoldSplit& split,
                     int fold);

CvReport run_cv(const ExperimentConfig& config, const Dataset& data);
CvReport run_cv(const ExperimentConfig& config);  // loads config.dataset_path

struct SweepResult {
    std::string parameter;
    std::vector<double> values;
    std::vector<CvReport> reports;
};

/// Runs one cross-validation per parameter value. Valid names: gates,
/// clusters, fuzziness, hidden-per-label, hcrf-window, l2.
SweepResult sweep(const ExperimentConfig& config, const Dataset& data,
                  const std::string& parameter, const std::vector<double>& values);

std::string cv_report_csv(const CvReport& r);
std::string cv_report_text(const CvReport& r);
std::string sweep_report_csv(const SweepResult& r);
std::string sweep_report_text(const SweepResult& r);

void write_file(const std::string& path, const std::string& content);

}  // namespace seqlab::bench
