#include "seqlab/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "seqlab/cnf.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/latent.hpp"
#include "seqlab/model_io.hpp"
#include "seqlab/rng.hpp"
#include "seqlab/text.hpp"

namespace seqlab::bench {

Scenario scenario_from_name(const std::string& name) {
    if (name == "raw") return Scenario::Raw;
    if (name == "dbn") return Scenario::Dbn;
    if (name == "fcm") return Scenario::Fcm;
    throw ConfigError("unknown scenario '" + name + "' (expected raw, dbn or fcm)");
}

ModelKind model_from_name(const std::string& name) {
    if (name == "crf") return ModelKind::Crf;
    if (name == "cnf") return ModelKind::Cnf;
    if (name == "hcrf") return ModelKind::Hcrf;
    if (name == "ldcrf") return ModelKind::Ldcrf;
    if (name == "ldcnf") return ModelKind::Ldcnf;
    if (name == "hmm") return ModelKind::Hmm;
    throw ConfigError("unknown model '" + name + "'");
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Raw: return "raw";
        case Scenario::Dbn: return "dbn";
        case Scenario::Fcm: return "fcm";
    }
    return "unknown";
}

const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Crf: return "crf";
        case ModelKind::Cnf: return "cnf";
        case ModelKind::Hcrf: return "hcrf";
        case ModelKind::Ldcrf: return "ldcrf";
        case ModelKind::Ldcnf: return "ldcnf";
        case ModelKind::Hmm: return "hmm";
    }
    return "unknown";
}

Evaluation evaluate(const std::vector<LabelSequence>& predicted,
                    const std::vector<LabelSequence>& truth, int num_labels) {
    if (predicted.size() != truth.size()) {
        throw InputError("predicted and truth sequence counts differ");
    }
    Evaluation out;
    out.confusion = Eigen::MatrixXi::Zero(num_labels, num_labels);
    long correct = 0;
    long total = 0;
    for (std::size_t s = 0; s < predicted.size(); ++s) {
        if (predicted[s].length() != truth[s].length()) {
            throw InputError("predicted and truth sequence lengths differ");
        }
        for (int t = 0; t < truth[s].length(); ++t) {
            const int p = predicted[s].labels[static_cast<std::size_t>(t)];
            const int y = truth[s].labels[static_cast<std::size_t>(t)];
            if (p < 0 || p >= num_labels || y < 0 || y >= num_labels) {
                throw InputError("label index out of range in evaluation");
            }
            out.confusion(y, p) += 1;
            correct += (p == y);
            ++total;
        }
    }
    if (total == 0) throw InputError("evaluation over zero epochs");
    out.accuracy_pct = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    return out;
}

double aggregate_folds(const std::vector<double>& fold_values) {
    if (fold_values.empty()) throw InputError("cannot aggregate an empty fold list");
    double sum = 0.0;
    for (double v : fold_values) sum += v;
    return sum / static_cast<double>(fold_values.size());
}

namespace {

int categorical(const Eigen::VectorXd& p, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        acc += p(i);
        if (u < acc) return i;
    }
    return static_cast<int>(p.size()) - 1;
}

}  // namespace

SynthResult generate_synth(const SynthConfig& config) {
    if (config.states < 2) throw ConfigError("synthetic data needs at least 2 states");
    if (config.dim < 1 || config.sequences < 1 || config.length < 1) {
        throw ConfigError("synthetic dimensions, sequence count and length must be positive");
    }
    if (config.separation < 0.0) throw ConfigError("separation must be non-negative");
    if (config.self_transition < 0.0 || config.self_transition >= 1.0) {
        throw ConfigError("self-transition probability must lie in [0, 1)");
    }

    Rng rng(config.seed);
    const int L = config.states;
    const int m = config.dim;

    LabelAlphabet alphabet;
    for (int l = 0; l < L; ++l) alphabet.add("s" + std::to_string(l));

    // Emission means with pairwise distance = separation. With m >= L the
    // scaled one-hot corners are exactly equidistant; otherwise random
    // directions give it approximately.
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(L, m);
    const double radius = config.separation / std::sqrt(2.0);
    if (m >= L) {
        for (int l = 0; l < L; ++l) mean(l, l) = radius;
    } else {
        for (int l = 0; l < L; ++l) {
            Eigen::VectorXd v(m);
            for (int j = 0; j < m; ++j) v(j) = rng.gaussian();
            mean.row(l) = radius * v.normalized().transpose();
        }
    }

    Eigen::VectorXd initial(L);
    for (int l = 0; l < L; ++l) initial(l) = rng.open01();
    initial /= initial.sum();

    Eigen::MatrixXd trans(L, L);
    for (int a = 0; a < L; ++a) {
        Eigen::VectorXd row(L);
        for (int b = 0; b < L; ++b) row(b) = rng.open01();
        row /= row.sum();
        trans.row(a) = (1.0 - config.self_transition) * row.transpose();
        trans(a, a) += config.self_transition;
    }

    SynthResult out;
    out.data.alphabet = alphabet;
    out.data.dim = m;

    int width = 1;
    for (int v = config.sequences - 1; v >= 10; v /= 10) ++width;
    for (int s = 0; s < config.sequences; ++s) {
        LabeledSequence seq;
        std::ostringstream id;
        id << "synth" << std::setfill('0') << std::setw(width) << s;
        seq.x.id = id.str();
        seq.x.epochs.resize(config.length, m);
        seq.y.labels.resize(static_cast<std::size_t>(config.length));
        int state = categorical(initial, rng);
        for (int t = 0; t < config.length; ++t) {
            if (t > 0) state = categorical(trans.row(state).transpose(), rng);
            seq.y.labels[static_cast<std::size_t>(t)] = state;
            for (int j = 0; j < m; ++j) seq.x.epochs(t, j) = mean(state, j) + rng.gaussian();
        }
        out.data.sequences.push_back(std::move(seq));
    }

    out.generator.alphabet = alphabet;
    out.generator.initial = initial;
    out.generator.trans = trans;
    out.generator.mean = mean;
    out.generator.var = Eigen::MatrixXd::Ones(L, m);
    return out;
}

namespace {

io::AnyModel train_model(const ExperimentConfig& config, const Dataset& train,
                         std::uint64_t seed) {
    switch (config.model) {
        case ModelKind::Crf: {
            crf::TrainConfig tc;
            tc.l2 = config.l2;
            tc.optimizer = config.optimizer;
            return crf::train(train, tc);
        }
        case ModelKind::Cnf: {
            cnf::TrainConfig tc;
            tc.gates = config.gates;
            tc.l2 = config.l2;
            tc.seed = seed;
            tc.optimizer = config.optimizer;
            return cnf::train(train, tc);
        }
        case ModelKind::Hcrf:
        case ModelKind::Ldcrf:
        case ModelKind::Ldcnf: {
            latent::TrainConfig tc;
            tc.variant = config.model == ModelKind::Hcrf    ? latent::Variant::Hcrf
                         : config.model == ModelKind::Ldcrf ? latent::Variant::Ldcrf
                                                            : latent::Variant::Ldcnf;
            tc.hidden_per_label = config.hidden_per_label;
            tc.window = config.hcrf_window;
            tc.gates = config.gates;
            tc.l2 = config.l2;
            tc.seed = seed;
            tc.optimizer = config.optimizer;
            return latent::train_latent(train, tc);
        }
        case ModelKind::Hmm:
            return hmm::fit_supervised(train);
    }
    throw ConfigError("unhandled model kind");
}

Eigen::VectorXd packed_weights(const io::AnyModel& model) {
    return std::visit(
        [](const auto& m) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, crf::CrfModel>) {
                return crf::pack(m);
            } else if constexpr (std::is_same_v<T, cnf::CnfModel>) {
                return cnf::pack(m);
            } else if constexpr (std::is_same_v<T, latent::LatentModel>) {
                return latent::pack(m);
            } else {
                Eigen::VectorXd v(m.initial.size() + m.trans.size() + m.mean.size() +
                                  m.var.size());
                long at = 0;
                v.segment(at, m.initial.size()) = m.initial;
                at += m.initial.size();
                v.segment(at, m.trans.size()) =
                    Eigen::Map<const Eigen::VectorXd>(m.trans.data(), m.trans.size());
                at += m.trans.size();
                v.segment(at, m.mean.size()) =
                    Eigen::Map<const Eigen::VectorXd>(m.mean.data(), m.mean.size());
                at += m.mean.size();
                v.segment(at, m.var.size()) =
                    Eigen::Map<const Eigen::VectorXd>(m.var.data(), m.var.size());
                return v;
            }
        },
        model);
}

LabelSequence predict_any(const io::AnyModel& model, const ObservationSequence& x) {
    return std::visit(
        [&](const auto& m) -> LabelSequence {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, crf::CrfModel>) {
                return crf::predict(m, x);
            } else if constexpr (std::is_same_v<T, cnf::CnfModel>) {
                return cnf::predict(m, x);
            } else if constexpr (std::is_same_v<T, latent::LatentModel>) {
                return latent::predict(m, x);
            } else {
                return hmm::decode(m, x);
            }
        },
        model);
}

std::vector<std::string> build_config_echo(const ExperimentConfig& config) {
    std::vector<std::string> echo;
    echo.push_back(std::string("model=") + model_name(config.model));
    echo.push_back(std::string("scenario=") + scenario_name(config.scenario));
    echo.push_back("folds=" + std::to_string(config.folds));
    echo.push_back("seed=" + std::to_string(config.seed));
    if (!config.dataset_path.empty()) echo.push_back("data=" + config.dataset_path);
    if (config.model != ModelKind::Hmm) {
        echo.push_back("l2=" + format_double(config.l2));
        echo.push_back(std::string("optimizer=") + optim::method_name(config.optimizer.method));
        echo.push_back("max-iter=" + std::to_string(config.optimizer.max_iterations));
        echo.push_back("tol=" + format_double(config.optimizer.tolerance));
        echo.push_back("context-window=" + std::to_string(config.context_window));
        echo.push_back("max-segment=" + std::to_string(config.max_segment));
    }
    if (config.model == ModelKind::Cnf || config.model == ModelKind::Ldcnf) {
        echo.push_back("gates=" + std::to_string(config.gates));
    }
    if (config.model == ModelKind::Hcrf || config.model == ModelKind::Ldcrf ||
        config.model == ModelKind::Ldcnf) {
        echo.push_back("hidden-per-label=" + std::to_string(config.hidden_per_label));
    }
    if (config.model == ModelKind::Hcrf) {
        echo.push_back("hcrf-window=" + std::to_string(config.hcrf_window));
    }
    if (config.scenario == Scenario::Fcm) {
        echo.push_back("clusters=" + std::to_string(config.fcm.clusters));
        echo.push_back("fuzziness=" + format_double(config.fcm.fuzziness));
        echo.push_back("fcm-tol=" + format_double(config.fcm.tolerance));
        echo.push_back("fcm-max-iter=" + std::to_string(config.fcm.max_iterations));
    }
    if (config.scenario == Scenario::Dbn) {
        std::string layers;
        for (std::size_t i = 0; i < config.dbn.layer_sizes.size(); ++i) {
            if (i) layers += 'x';
            layers += std::to_string(config.dbn.layer_sizes[i]);
        }
        echo.push_back("dbn-layers=" + layers);
        echo.push_back("dbn-epochs=" + std::to_string(config.dbn.epochs));
        echo.push_back("dbn-lr=" + format_double(config.dbn.learning_rate));
        echo.push_back("dbn-minibatch=" + std::to_string(config.dbn.minibatch));
        echo.push_back(std::string("dbn-backprop=") + (config.dbn.backprop ? "on" : "off"));
    }
    return echo;
}

}  // namespace

FoldOutcome run_fold(const ExperimentConfig& config, const Dataset& data, const FoldSplit& split,
                     int fold) {
    const auto t0 = std::chrono::steady_clock::now();

    const Dataset train_raw = data.subset(split.train_indices(data, fold));
    const Dataset test_raw = data.subset(split.test_indices(data, fold));
    if (train_raw.num_sequences() == 0 || test_raw.num_sequences() == 0) {
        throw ConfigError("fold " + std::to_string(fold) + " has an empty split");
    }

    // Standardization and extractors are fit on the training split only;
    // the test split is transformed with training statistics.
    const Scaler scaler = fit_scaler(train_raw);
    Dataset train = apply_scaler(scaler, train_raw);
    Dataset test = apply_scaler(scaler, test_raw);

    const std::uint64_t fold_seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(fold));
    switch (config.scenario) {
        case Scenario::Raw:
            break;
        case Scenario::Fcm: {
            fcm::FcmConfig fc = config.fcm;
            fc.seed = derive_seed(fold_seed, 1);
            const fcm::FuzzyPartition part = fcm::fit_dataset(train, fc);
            train = fcm::transform_dataset(part, train);
            test = fcm::transform_dataset(part, test);
            break;
        }
        case Scenario::Dbn: {
            dbn::DbnConfig dc = config.dbn;
            dc.seed = derive_seed(fold_seed, 2);
            dbn::DbnModel extractor = dbn::pretrain_dataset(train, dc);
            extractor = dbn::finetune_softmax(extractor, train, dc);
            train = dbn::transform_dataset(extractor, train);
            test = dbn::transform_dataset(extractor, test);
            break;
        }
    }

    if (config.context_window > 0) {
        train = expand_context(train, config.context_window);
        test = expand_context(test, config.context_window);
    }
    const Dataset train_fit = chunk_sequences(train, config.max_segment);

    const io::AnyModel model = train_model(config, train_fit, derive_seed(fold_seed, 3));

    FoldOutcome out;
    out.model_weights = packed_weights(model);
    out.predictions.reserve(test.sequences.size());
    std::vector<LabelSequence> truth;
    truth.reserve(test.sequences.size());
    for (const auto& seq : test.sequences) {
        out.predictions.push_back(predict_any(model, seq.x));
        truth.push_back(seq.y);
    }
    out.eval = evaluate(out.predictions, truth, data.alphabet.size());

    const auto t1 = std::chrono::steady_clock::now();
    out.seconds = std::chrono::duration<double>(t1 - t0).count();
    return out;
}

CvReport run_cv(const ExperimentConfig& config, const Dataset& data) {
    data.validate();
    if (config.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    const FoldSplit split = split_folds(data, config.folds, config.seed);

    CvReport report;
    report.labels = data.alphabet.names();
    report.config_echo = build_config_echo(config);
    report.confusion = Eigen::MatrixXi::Zero(data.alphabet.size(), data.alphabet.size());

    std::vector<double> accs;
    std::vector<double> times;
    for (int fold = 0; fold < config.folds; ++fold) {
        const FoldOutcome outcome = run_fold(config, data, split, fold);
        const double acc = round2(outcome.eval.accuracy_pct);
        const double hours = round2(outcome.seconds / 3600.0);
        report.folds.push_back(FoldRow{fold + 1, acc, hours});
        report.confusion += outcome.eval.confusion;
        accs.push_back(acc);
        times.push_back(hours);
    }
    report.mean_accuracy_pct = round2(aggregate_folds(accs));
    report.mean_time_hours = round2(aggregate_folds(times));
    return report;
}

CvReport run_cv(const ExperimentConfig& config) {
    if (config.dataset_path.empty()) throw ConfigError("no dataset path configured");
    return run_cv(config, load_dataset(config.dataset_path));
}

SweepResult sweep(const ExperimentConfig& config, const Dataset& data,
                  const std::string& parameter, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    const auto as_int = [&](double v) {
        const int i = static_cast<int>(std::llround(v));
        if (std::abs(v - i) > 1e-9) {
            throw ConfigError("parameter '" + parameter + "' takes integer values");
        }
        return i;
    };

    const bool gated = config.model == ModelKind::Cnf || config.model == ModelKind::Ldcnf;
    const bool latent_model = config.model == ModelKind::Hcrf ||
                              config.model == ModelKind::Ldcrf ||
                              config.model == ModelKind::Ldcnf;

    SweepResult out;
    out.parameter = parameter;
    out.values = values;
    for (double v : values) {
        ExperimentConfig c = config;
        if (parameter == "gates") {
            if (!gated) throw ConfigError("'gates' applies to cnf and ldcnf models only");
            c.gates = as_int(v);
        } else if (parameter == "clusters") {
            if (config.scenario != Scenario::Fcm) {
                throw ConfigError("'clusters' applies to the fcm scenario only");
            }
            c.fcm.clusters = as_int(v);
        } else if (parameter == "fuzziness") {
            if (config.scenario != Scenario::Fcm) {
                throw ConfigError("'fuzziness' applies to the fcm scenario only");
            }
            c.fcm.fuzziness = v;
        } else if (parameter == "hidden-per-label") {
            if (!latent_model) {
                throw ConfigError("'hidden-per-label' applies to hcrf, ldcrf and ldcnf only");
            }
            c.hidden_per_label = as_int(v);
        } else if (parameter == "hcrf-window") {
            if (config.model != ModelKind::Hcrf) {
                throw ConfigError("'hcrf-window' applies to the hcrf model only");
            }
            c.hcrf_window = as_int(v);
        } else if (parameter == "l2") {
            if (config.model == ModelKind::Hmm) {
                throw ConfigError("'l2' does not apply to the hmm model");
            }
            c.l2 = v;
        } else {
            throw ConfigError("unknown sweep parameter '" + parameter + "'");
        }
        out.reports.push_back(run_cv(c, data));
    }
    return out;
}

namespace {

/// Short column tag for a sweep parameter, mirroring the table headers
/// ("g=3", "cl=4", "w=1.05").
std::string parameter_tag(const std::string& parameter) {
    if (parameter == "gates") return "g";
    if (parameter == "clusters") return "cl";
    if (parameter == "fuzziness") return "w";
    if (parameter == "hidden-per-label") return "r";
    if (parameter == "hcrf-window") return "W";
    return parameter;
}

}  // namespace

std::string cv_report_csv(const CvReport& r) {
    std::ostringstream out;
    out << "# seqlab cv report v1\n";
    for (const auto& line : r.config_echo) out << "# " << line << '\n';
    out << "fold,accuracy_pct,time_hours\n";
    for (const auto& row : r.folds) {
        out << row.fold << ',' << format_round2(row.accuracy_pct) << ','
            << format_round2(row.time_hours) << '\n';
    }
    out << "average," << format_round2(r.mean_accuracy_pct) << ','
        << format_round2(r.mean_time_hours) << '\n';
    out << '\n';
    out << "confusion";
    for (const auto& name : r.labels) out << ',' << name;
    out << '\n';
    for (int i = 0; i < r.confusion.rows(); ++i) {
        out << r.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < r.confusion.cols(); ++j) out << ',' << r.confusion(i, j);
        out << '\n';
    }
    return out.str();
}

std::string cv_report_text(const CvReport& r) {
    std::ostringstream out;
    out << "seqlab cross-validation report\n";
    for (const auto& line : r.config_echo) out << "  " << line << '\n';
    out << '\n';
    out << std::setw(8) << "Fold" << "  " << std::setw(14) << "Accuracy (%)" << "  "
        << std::setw(14) << "Time (hours)" << '\n';
    for (const auto& row : r.folds) {
        out << std::setw(8) << row.fold << "  " << std::setw(14) << format_round2(row.accuracy_pct)
            << "  " << std::setw(14) << format_round2(row.time_hours) << '\n';
    }
    out << std::setw(8) << "Average" << "  " << std::setw(14)
        << format_round2(r.mean_accuracy_pct) << "  " << std::setw(14)
        << format_round2(r.mean_time_hours) << '\n';

    out << "\nConfusion (rows = truth, columns = predicted)\n";
    std::size_t w = 7;
    for (const auto& name : r.labels) w = std::max(w, name.size() + 2);
    out << std::string(w, ' ');
    for (const auto& name : r.labels) out << std::setw(static_cast<int>(w)) << name;
    out << '\n';
    for (int i = 0; i < r.confusion.rows(); ++i) {
        out << std::setw(static_cast<int>(w)) << r.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < r.confusion.cols(); ++j) {
            out << std::setw(static_cast<int>(w)) << r.confusion(i, j);
        }
        out << '\n';
    }
    return out.str();
}

std::string sweep_report_csv(const SweepResult& r) {
    if (r.reports.empty()) throw InputError("empty sweep result");
    const std::string tag = parameter_tag(r.parameter);
    std::ostringstream out;
    out << "# seqlab sweep report v1\n";
    out << "# parameter=" << r.parameter << '\n';
    for (const auto& line : r.reports.front().config_echo) out << "# " << line << '\n';

    out << "fold";
    for (double v : r.values) out << ",acc[" << tag << '=' << format_double(v) << ']';
    for (double v : r.values) out << ",time[" << tag << '=' << format_double(v) << ']';
    out << '\n';

    const std::size_t folds = r.reports.front().folds.size();
    for (std::size_t f = 0; f < folds; ++f) {
        out << r.reports.front().folds[f].fold;
        for (const auto& rep : r.reports) out << ',' << format_round2(rep.folds[f].accuracy_pct);
        for (const auto& rep : r.reports) out << ',' << format_round2(rep.folds[f].time_hours);
        out << '\n';
    }
    out << "average";
    for (const auto& rep : r.reports) out << ',' << format_round2(rep.mean_accuracy_pct);
    for (const auto& rep : r.reports) out << ',' << format_round2(rep.mean_time_hours);
    out << '\n';
    return out.str();
}

std::string sweep_report_text(const SweepResult& r) {
    if (r.reports.empty()) throw InputError("empty sweep result");
    const std::string tag = parameter_tag(r.parameter);
    const int colw = 10;
    std::ostringstream out;
    out << "seqlab sweep report: " << r.parameter << '\n';
    for (const auto& line : r.reports.front().config_echo) out << "  " << line << '\n';
    out << '\n';

    const auto group = [&](const char* title) {
        out << std::setw(8) << "" << "  " << title << '\n';
        out << std::setw(8) << "Fold";
        for (double v : r.values) {
            out << std::setw(colw) << (tag + "=" + format_double(v));
        }
        out << '\n';
    };

    group("Accuracy (%)");
    const std::size_t folds = r.reports.front().folds.size();
    for (std::size_t f = 0; f < folds; ++f) {
        out << std::setw(8) << r.reports.front().folds[f].fold;
        for (const auto& rep : r.reports) {
            out << std::setw(colw) << format_round2(rep.folds[f].accuracy_pct);
        }
        out << '\n';
    }
    out << std::setw(8) << "Average";
    for (const auto& rep : r.reports) out << std::setw(colw) << format_round2(rep.mean_accuracy_pct);
    out << "\n\n";

    group("Time (hours)");
    for (std::size_t f = 0; f < folds; ++f) {
        out << std::setw(8) << r.reports.front().folds[f].fold;
        for (const auto& rep : r.reports) {
            out << std::setw(colw) << format_round2(rep.folds[f].time_hours);
        }
        out << '\n';
    }
    out << std::setw(8) << "Average";
    for (const auto& rep : r.reports) out << std::setw(colw) << format_round2(rep.mean_time_hours);
    out << '\n';
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace seqlab::bench
