// seqlab command line: synthetic data, feature extraction, training,
// prediction, cross-validation, parameter sweeps and gradient checks.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "seqlab/bench.hpp"
#include "seqlab/cnf.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/dataset.hpp"
#include "seqlab/dbn.hpp"
#include "seqlab/error.hpp"
#include "seqlab/fcm.hpp"
#include "seqlab/hmm.hpp"
#include "seqlab/latent.hpp"
#include "seqlab/model_io.hpp"
#include "seqlab/optimize.hpp"
#include "seqlab/text.hpp"

namespace {

using namespace seqlab;

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (const auto& tok : split_csv_line(csv)) {
        out.push_back(static_cast<int>(parse_long(tok, "list value")));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto& tok : split_csv_line(csv)) {
        out.push_back(parse_double(tok, "list value"));
    }
    return out;
}

struct CommonModelFlags {
    std::string model = "crf";
    double l2 = 1e-2;
    int gates = 3;
    int hidden_per_label = 2;
    int hcrf_window = 11;
    int context_window = 0;
    int max_segment = 1000;
    std::string optimizer = "bfgs";
    int max_iter = 500;
    double tol = 1e-5;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "Model: crf, cnf, hcrf, ldcrf, ldcnf, hmm")
            ->capture_default_str();
        cmd->add_option("--l2", l2, "L2 regularization coefficient")->capture_default_str();
        cmd->add_option("--gates", gates, "Gate count for cnf/ldcnf")->capture_default_str();
        cmd->add_option("--hidden-per-label", hidden_per_label,
                        "Hidden states per label for hcrf/ldcrf/ldcnf")
            ->capture_default_str();
        cmd->add_option("--hcrf-window", hcrf_window, "HCRF window length (odd)")
            ->capture_default_str();
        cmd->add_option("--context-window", context_window,
                        "Concatenate +-w neighbouring epochs into each feature vector")
            ->capture_default_str();
        cmd->add_option("--max-segment", max_segment,
                        "Split sequences longer than this for training")
            ->capture_default_str();
        cmd->add_option("--optimizer", optimizer, "bfgs, lbfgs or cg")->capture_default_str();
        cmd->add_option("--max-iter", max_iter, "Optimizer iteration cap")->capture_default_str();
        cmd->add_option("--tol", tol, "Optimizer gradient tolerance")->capture_default_str();
        cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    }

    optim::OptimConfig optim_config() const {
        optim::OptimConfig c;
        c.method = optim::method_from_name(optimizer);
        c.max_iterations = max_iter;
        c.tolerance = tol;
        return c;
    }
};

struct ExtractorFlags {
    int clusters = 5;
    double fuzziness = 1.05;
    double fcm_tol = 1e-6;
    int fcm_max_iter = 500;
    std::string dbn_layers = "64,32";
    int dbn_epochs = 200;
    double dbn_lr = 0.05;
    int dbn_minibatch = 32;
    bool dbn_backprop = false;

    /// Flag spellings inside `extract fcm` and `extract dbn`, where they
    /// cannot collide with the optimizer flags.
    void attach_fcm(CLI::App* cmd) {
        cmd->add_option("--clusters", clusters, "Cluster count")->capture_default_str();
        cmd->add_option("--fuzziness", fuzziness, "Fuzziness degree w (> 1)")
            ->capture_default_str();
        cmd->add_option("--tol", fcm_tol, "Objective tolerance")->capture_default_str();
        cmd->add_option("--max-iter", fcm_max_iter, "Iteration cap")->capture_default_str();
    }

    void attach_dbn(CLI::App* cmd) {
        cmd->add_option("--layers", dbn_layers, "RBM layer sizes, e.g. 64,32")
            ->capture_default_str();
        cmd->add_option("--epochs", dbn_epochs, "CD-1 epochs per layer")->capture_default_str();
        cmd->add_option("--lr", dbn_lr, "CD-1 learning rate")->capture_default_str();
        cmd->add_option("--minibatch", dbn_minibatch, "CD-1 minibatch size")
            ->capture_default_str();
        cmd->add_flag("--backprop", dbn_backprop, "Fine-tune the whole stack");
    }

    /// Prefixed spellings for cv/sweep, which also carry optimizer flags.
    void attach(CLI::App* cmd) {
        cmd->add_option("--clusters", clusters, "FCM cluster count")->capture_default_str();
        cmd->add_option("--fuzziness", fuzziness, "FCM fuzziness degree w (> 1)")
            ->capture_default_str();
        cmd->add_option("--fcm-tol", fcm_tol, "FCM objective tolerance")->capture_default_str();
        cmd->add_option("--fcm-max-iter", fcm_max_iter, "FCM iteration cap")
            ->capture_default_str();
        cmd->add_option("--dbn-layers", dbn_layers, "RBM layer sizes, e.g. 64,32")
            ->capture_default_str();
        cmd->add_option("--dbn-epochs", dbn_epochs, "CD-1 epochs per layer")
            ->capture_default_str();
        cmd->add_option("--dbn-lr", dbn_lr, "CD-1 learning rate")->capture_default_str();
        cmd->add_option("--dbn-minibatch", dbn_minibatch, "CD-1 minibatch size")
            ->capture_default_str();
        cmd->add_flag("--dbn-backprop", dbn_backprop, "Fine-tune the whole stack");
    }

    fcm::FcmConfig fcm_config(std::uint64_t seed) const {
        fcm::FcmConfig c;
        c.clusters = clusters;
        c.fuzziness = fuzziness;
        c.tolerance = fcm_tol;
        c.max_iterations = fcm_max_iter;
        c.seed = seed;
        return c;
    }

    dbn::DbnConfig dbn_config(std::uint64_t seed) const {
        dbn::DbnConfig c;
        c.layer_sizes = parse_int_list(dbn_layers);
        c.epochs = dbn_epochs;
        c.learning_rate = dbn_lr;
        c.minibatch = dbn_minibatch;
        c.backprop = dbn_backprop;
        c.seed = seed;
        return c;
    }
};

void run_synth(const bench::SynthConfig& config, const std::string& out) {
    const bench::SynthResult result = bench::generate_synth(config);
    save_dataset(result.data, out);
    std::cout << "wrote " << result.data.num_sequences() << " sequences ("
              << result.data.total_epochs() << " epochs, dim " << result.data.dim << ") to "
              << out << "\n";
}

void run_extract_fcm(const std::string& data_path, const ExtractorFlags& ex, std::uint64_t seed,
                     const std::string& out) {
    const Dataset raw = load_dataset(data_path);
    const auto [standardized, scaler] = standardize(raw, raw);
    const fcm::FuzzyPartition part = fcm::fit_dataset(standardized, ex.fcm_config(seed));
    const Dataset feats = fcm::transform_dataset(part, standardized);
    save_dataset(feats, out);
    std::cout << "fcm: " << part.iterations << " iterations, objective "
              << format_double(part.objective_history.back()) << "; wrote " << feats.dim
              << " membership features per epoch to " << out << "\n";
}

void run_extract_dbn(const std::string& data_path, const ExtractorFlags& ex, std::uint64_t seed,
                     const std::string& out) {
    const Dataset raw = load_dataset(data_path);
    const auto [standardized, scaler] = standardize(raw, raw);
    const dbn::DbnConfig config = ex.dbn_config(seed);
    dbn::DbnModel model = dbn::pretrain_dataset(standardized, config);
    model = dbn::finetune_softmax(model, standardized, config);
    const Dataset feats = dbn::transform_dataset(model, standardized);
    save_dataset(feats, out);
    std::cout << "dbn: wrote " << feats.dim << " class-probability features per epoch to " << out
              << "\n";
}

io::AnyModel train_one(const CommonModelFlags& flags, const Dataset& train) {
    const bench::ModelKind kind = bench::model_from_name(flags.model);
    switch (kind) {
        case bench::ModelKind::Crf: {
            crf::TrainConfig tc;
            tc.l2 = flags.l2;
            tc.optimizer = flags.optim_config();
            return crf::train(train, tc);
        }
        case bench::ModelKind::Cnf: {
            cnf::TrainConfig tc;
            tc.gates = flags.gates;
            tc.l2 = flags.l2;
            tc.seed = flags.seed;
            tc.optimizer = flags.optim_config();
            return cnf::train(train, tc);
        }
        case bench::ModelKind::Hcrf:
        case bench::ModelKind::Ldcrf:
        case bench::ModelKind::Ldcnf: {
            latent::TrainConfig tc;
            tc.variant = kind == bench::ModelKind::Hcrf    ? latent::Variant::Hcrf
                         : kind == bench::ModelKind::Ldcrf ? latent::Variant::Ldcrf
                                                           : latent::Variant::Ldcnf;
            tc.hidden_per_label = flags.hidden_per_label;
            tc.window = flags.hcrf_window;
            tc.gates = flags.gates;
            tc.l2 = flags.l2;
            tc.seed = flags.seed;
            tc.optimizer = flags.optim_config();
            return latent::train_latent(train, tc);
        }
        case bench::ModelKind::Hmm:
            return hmm::fit_supervised(train);
    }
    throw ConfigError("unhandled model kind");
}

void run_train(const std::string& data_path, const CommonModelFlags& flags, bool do_standardize,
               const std::string& out) {
    Dataset data = load_dataset(data_path);
    io::SavedModel saved;
    if (do_standardize) {
        auto [scaled, scaler] = standardize(data, data);
        data = std::move(scaled);
        saved.scaler = scaler;
    }
    if (flags.context_window > 0) data = expand_context(data, flags.context_window);
    const Dataset train_fit = chunk_sequences(data, flags.max_segment);
    saved.model = train_one(flags, train_fit);
    save_model(saved, out);
    std::cout << "trained " << io::kind_of(saved.model) << " model on " << data.num_sequences()
              << " sequences; saved to " << out << "\n";
}

void run_predict(const std::string& model_path, const std::string& data_path, int context_window,
                 const std::string& out) {
    const io::SavedModel saved = io::load_model(model_path);
    Dataset data = load_dataset(data_path);
    if (context_window > 0) data = expand_context(data, context_window);

    const LabelAlphabet& alphabet = io::alphabet_of(saved.model);
    std::vector<LabelSequence> predictions;
    std::vector<LabelSequence> truth;
    std::ostringstream csv;
    csv << "sequence_id,epoch_index,predicted\n";
    for (const auto& seq : data.sequences) {
        LabelSequence pred = io::predict(saved, seq.x);
        for (int t = 0; t < pred.length(); ++t) {
            csv << seq.x.id << ',' << t << ','
                << alphabet.name(pred.labels[static_cast<std::size_t>(t)]) << '\n';
        }
        predictions.push_back(std::move(pred));
        truth.push_back(seq.y);
    }
    if (!out.empty()) bench::write_file(out, csv.str());

    // score against the file's own labels when alphabets are compatible
    if (data.alphabet == alphabet) {
        const bench::Evaluation eval = bench::evaluate(predictions, truth, alphabet.size());
        std::cout << "accuracy " << format_round2(eval.accuracy_pct) << " over "
                  << data.total_epochs() << " epochs\n";
    } else {
        std::cout << "decoded " << data.total_epochs() << " epochs (label alphabets differ; "
                  << "no accuracy computed)\n";
    }
}

bench::ExperimentConfig make_experiment(const std::string& data_path, const std::string& scenario,
                                        int folds, const CommonModelFlags& flags,
                                        const ExtractorFlags& ex) {
    bench::ExperimentConfig config;
    config.scenario = bench::scenario_from_name(scenario);
    config.model = bench::model_from_name(flags.model);
    config.folds = folds;
    config.seed = flags.seed;
    config.dataset_path = data_path;
    config.gates = flags.gates;
    config.hidden_per_label = flags.hidden_per_label;
    config.hcrf_window = flags.hcrf_window;
    config.l2 = flags.l2;
    config.context_window = flags.context_window;
    config.max_segment = flags.max_segment;
    config.optimizer = flags.optim_config();
    config.fcm = ex.fcm_config(flags.seed);
    config.dbn = ex.dbn_config(flags.seed);
    return config;
}

void run_cv_cmd(const bench::ExperimentConfig& config, const std::string& out) {
    const bench::CvReport report = bench::run_cv(config);
    std::cout << bench::cv_report_text(report);
    if (!out.empty()) {
        bench::write_file(out + ".csv", bench::cv_report_csv(report));
        bench::write_file(out + ".txt", bench::cv_report_text(report));
        std::cout << "\nwrote " << out << ".csv and " << out << ".txt\n";
    }
}

void run_sweep_cmd(const bench::ExperimentConfig& config, const std::string& parameter,
                   const std::string& values_csv, const std::string& out) {
    const std::vector<double> values = parse_double_list(values_csv);
    const Dataset data = load_dataset(config.dataset_path);
    const bench::SweepResult result = bench::sweep(config, data, parameter, values);
    std::cout << bench::sweep_report_text(result);
    if (!out.empty()) {
        bench::write_file(out + ".csv", bench::sweep_report_csv(result));
        bench::write_file(out + ".txt", bench::sweep_report_text(result));
        std::cout << "\nwrote " << out << ".csv and " << out << ".txt\n";
    }
}

int run_gradcheck(const std::string& which, std::uint64_t seed, double eps) {
    bench::SynthConfig sc;
    sc.states = 3;
    sc.dim = 3;
    sc.sequences = 2;
    sc.length = 5;
    sc.separation = 1.5;
    sc.seed = seed;
    const Dataset raw = bench::generate_synth(sc).data;
    const Dataset data = standardize(raw, raw).first;

    Rng rng(derive_seed(seed, 7));
    const auto fill = [&rng](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    };

    const int L = data.alphabet.size();
    const int m = data.dim;
    std::vector<std::pair<std::string, double>> results;

    const auto want = [&](const char* name) { return which == "all" || which == name; };

    if (want("crf")) {
        crf::CrfModel model = crf::zero_model(data.alphabet, m, 0.1);
        fill(model.state);
        fill(model.trans);
        Eigen::MatrixXd b(1, L);
        fill(b);
        model.bias = b.row(0).transpose();
        crf::CrfModel scratch = model;
        const optim::Objective obj = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            crf::unpack(v, scratch);
            auto [f, grad] = crf::nll_and_gradient(scratch, data);
            g = grad;
            return f;
        };
        results.emplace_back("crf", optim::check_gradient(obj, crf::pack(model), eps));
    }
    if (want("cnf")) {
        cnf::CnfModel model;
        model.alphabet = data.alphabet;
        model.l2 = 0.1;
        model.gate = cnf::random_gate_layer(3, m, derive_seed(seed, 11));
        model.state = Eigen::MatrixXd(L, 3);
        model.trans = Eigen::MatrixXd(L, L);
        fill(model.state);
        fill(model.trans);
        Eigen::MatrixXd b(1, L);
        fill(b);
        model.bias = b.row(0).transpose();
        cnf::CnfModel scratch = model;
        const optim::Objective obj = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            cnf::unpack(v, scratch);
            auto [f, grad] = cnf::nll_and_gradient(scratch, data);
            g = grad;
            return f;
        };
        results.emplace_back("cnf", optim::check_gradient(obj, cnf::pack(model), eps));
    }
    for (const auto& [name, variant] :
         {std::pair<const char*, latent::Variant>{"hcrf", latent::Variant::Hcrf},
          {"ldcrf", latent::Variant::Ldcrf},
          {"ldcnf", latent::Variant::Ldcnf}}) {
        if (!want(name)) continue;
        latent::LatentModel model;
        model.variant = variant;
        model.alphabet = data.alphabet;
        model.hidden = latent::HiddenMap{L, 2};
        model.window = 3;
        model.l2 = 0.1;
        const int H = model.num_hidden();
        const int F = variant == latent::Variant::Ldcnf ? 2 : m;
        if (variant == latent::Variant::Ldcnf) {
            model.gate = cnf::random_gate_layer(2, m, derive_seed(seed, 13));
        }
        model.state = Eigen::MatrixXd(H, F);
        model.trans = Eigen::MatrixXd(H, H);
        fill(model.state);
        fill(model.trans);
        Eigen::MatrixXd b(1, H);
        fill(b);
        model.bias = b.row(0).transpose();
        if (variant == latent::Variant::Hcrf) {
            model.compat = Eigen::MatrixXd(L, H);
            fill(model.compat);
        }
        latent::LatentModel scratch = model;
        const optim::Objective obj = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            latent::unpack(v, scratch);
            auto [f, grad] = latent::nll_and_gradient(scratch, data);
            g = grad;
            return f;
        };
        results.emplace_back(name, optim::check_gradient(obj, latent::pack(model), eps));
    }

    if (results.empty()) {
        throw ConfigError("unknown gradcheck target '" + which +
                          "' (expected crf, cnf, hcrf, ldcrf, ldcnf or all)");
    }
    bool ok = true;
    for (const auto& [name, err] : results) {
        const bool pass = err <= 1e-4;
        ok = ok && pass;
        std::cout << name << ": max relative error " << format_double(err)
                  << (pass ? "  [ok]" : "  [FAIL]") << "\n";
    }
    return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqlab: sequence labeling with conditional-field models, an HMM baseline,\n"
                 "and unsupervised feature extraction (fuzzy C-means, RBM stacks)."};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    bench::SynthConfig synth_config;
    std::string synth_out;
    synth->add_option("--states", synth_config.states, "Label count")->capture_default_str();
    synth->add_option("--dim", synth_config.dim, "Feature dimension")->capture_default_str();
    synth->add_option("--sequences", synth_config.sequences, "Sequence count")
        ->capture_default_str();
    synth->add_option("--length", synth_config.length, "Epochs per sequence")
        ->capture_default_str();
    synth->add_option("--separation", synth_config.separation, "Distance between emission means")
        ->capture_default_str();
    synth->add_option("--self-transition", synth_config.self_transition,
                      "Probability mass added to staying in the same state")
        ->capture_default_str();
    synth->add_option("--seed", synth_config.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output CSV path")->required();
    synth->callback([&] { run_synth(synth_config, synth_out); });

    // extract fcm | extract dbn
    auto* extract = app.add_subcommand("extract", "Unsupervised feature extraction");
    extract->require_subcommand(1);
    struct {
        std::string data, out;
        std::uint64_t seed = 1;
        ExtractorFlags ex;
    } exfcm, exdbn;
    auto* efcm = extract->add_subcommand("fcm", "Fuzzy C-means membership features");
    efcm->add_option("--data", exfcm.data, "Input dataset CSV")->required();
    efcm->add_option("--seed", exfcm.seed, "Random seed")->capture_default_str();
    efcm->add_option("--out", exfcm.out, "Output CSV path")->required();
    exfcm.ex.attach_fcm(efcm);
    efcm->callback([&] { run_extract_fcm(exfcm.data, exfcm.ex, exfcm.seed, exfcm.out); });

    auto* edbn = extract->add_subcommand("dbn", "RBM-stack class-probability features");
    edbn->add_option("--data", exdbn.data, "Input dataset CSV")->required();
    edbn->add_option("--seed", exdbn.seed, "Random seed")->capture_default_str();
    edbn->add_option("--out", exdbn.out, "Output CSV path")->required();
    exdbn.ex.attach_dbn(edbn);
    edbn->callback([&] { run_extract_dbn(exdbn.data, exdbn.ex, exdbn.seed, exdbn.out); });

    // train
    auto* train = app.add_subcommand("train", "Train a model on a dataset");
    std::string train_data, train_out;
    bool train_standardize = true;
    CommonModelFlags train_flags;
    train->add_option("--data", train_data, "Training dataset CSV")->required();
    train->add_option("--out", train_out, "Model file path")->required();
    train->add_flag("--standardize,!--no-standardize", train_standardize,
                    "Z-score features and store the scaler in the model (default on)");
    train_flags.attach(train);
    train->callback([&] { run_train(train_data, train_flags, train_standardize, train_out); });

    // predict
    auto* predict = app.add_subcommand("predict", "Decode a dataset with a saved model");
    std::string pred_model, pred_data, pred_out;
    int pred_context = 0;
    predict->add_option("--model", pred_model, "Model file from 'train'")->required();
    predict->add_option("--data", pred_data, "Dataset CSV")->required();
    predict->add_option("--context-window", pred_context,
                        "Must match the value used at training time")
        ->capture_default_str();
    predict->add_option("--out", pred_out, "Predictions CSV path");
    predict->callback([&] { run_predict(pred_model, pred_data, pred_context, pred_out); });

    // cv
    auto* cv = app.add_subcommand("cv", "K-fold cross-validation benchmark");
    std::string cv_data, cv_scenario = "raw", cv_out;
    int cv_folds = 10;
    CommonModelFlags cv_flags;
    ExtractorFlags cv_ex;
    cv->add_option("--data", cv_data, "Dataset CSV")->required();
    cv->add_option("--scenario", cv_scenario, "Feature scenario: raw, dbn or fcm")
        ->capture_default_str();
    cv->add_option("--folds", cv_folds, "Fold count")->capture_default_str();
    cv->add_option("--out", cv_out, "Report path prefix (writes .csv and .txt)");
    cv_flags.attach(cv);
    cv_ex.attach(cv);
    cv->callback([&] {
        run_cv_cmd(make_experiment(cv_data, cv_scenario, cv_folds, cv_flags, cv_ex), cv_out);
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Cross-validate across one parameter's values");
    std::string sw_data, sw_scenario = "raw", sw_out, sw_param, sw_values;
    int sw_folds = 10;
    CommonModelFlags sw_flags;
    ExtractorFlags sw_ex;
    sweep->add_option("--data", sw_data, "Dataset CSV")->required();
    sweep->add_option("--scenario", sw_scenario, "Feature scenario: raw, dbn or fcm")
        ->capture_default_str();
    sweep->add_option("--folds", sw_folds, "Fold count")->capture_default_str();
    sweep->add_option("--param", sw_param,
                      "gates, clusters, fuzziness, hidden-per-label, hcrf-window or l2")
        ->required();
    sweep->add_option("--values", sw_values, "Comma-separated values, e.g. 2,3,4")->required();
    sweep->add_option("--out", sw_out, "Report path prefix (writes .csv and .txt)");
    sw_flags.attach(sweep);
    sw_ex.attach(sweep);
    sweep->callback([&] {
        run_sweep_cmd(make_experiment(sw_data, sw_scenario, sw_folds, sw_flags, sw_ex), sw_param,
                      sw_values, sw_out);
    });

    // gradcheck
    auto* gradcheck = app.add_subcommand(
        "gradcheck", "Compare analytic gradients with central finite differences");
    std::string gc_model = "all";
    std::uint64_t gc_seed = 1;
    double gc_eps = 1e-5;
    gradcheck->add_option("--model", gc_model, "crf, cnf, hcrf, ldcrf, ldcnf or all")
        ->capture_default_str();
    gradcheck->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
    gradcheck->add_option("--eps", gc_eps, "Finite-difference step")->capture_default_str();
    int gc_rc = 0;
    gradcheck->callback([&] { gc_rc = run_gradcheck(gc_model, gc_seed, gc_eps); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const StateError& e) {
        std::cerr << "state error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return gc_rc;
}
