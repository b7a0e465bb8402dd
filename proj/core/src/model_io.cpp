#include "seqlab/model_io.hpp"

#include <fstream>
#include <sstream>

#include "seqlab/text.hpp"

namespace seqlab::io {

void ModelFile::set_scalar(const std::string& key, const std::string& value) {
    scalars.emplace_back(key, value);
}

const std::string& ModelFile::scalar(const std::string& key) const {
    for (const auto& [k, v] : scalars) {
        if (k == key) return v;
    }
    throw DataError("model file is missing scalar '" + key + "'");
}

bool ModelFile::has_scalar(const std::string& key) const {
    for (const auto& [k, v] : scalars) {
        if (k == key) return true;
    }
    return false;
}

void ModelFile::set_block(const std::string& name, Eigen::MatrixXd m) {
    blocks.emplace_back(name, std::move(m));
}

const Eigen::MatrixXd& ModelFile::block(const std::string& name) const {
    for (const auto& [k, v] : blocks) {
        if (k == name) return v;
    }
    throw DataError("model file is missing block '" + name + "'");
}

bool ModelFile::has_block(const std::string& name) const {
    for (const auto& [k, v] : blocks) {
        if (k == name) return true;
    }
    return false;
}

void write_model_file(const ModelFile& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << "seqlab-model v" << f.version << '\n';
    out << "kind " << f.kind << '\n';
    out << "labels " << f.labels.size() << '\n';
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
        out << "label " << i << ' ' << f.labels[i] << '\n';
    }
    for (const auto& [k, v] : f.scalars) out << "scalar " << k << ' ' << v << '\n';
    for (const auto& [name, m] : f.blocks) {
        out << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) {
                if (j) out << ' ';
                out << format_double(m(i, j));
            }
            out << '\n';
        }
    }
    out << "end\n";
    if (!out) throw DataError("write failed: " + path);
}

ModelFile read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    ModelFile f;
    std::string line;

    if (!std::getline(in, line)) throw DataError("empty model file: " + path);
    if (line.rfind("seqlab-model v", 0) != 0) throw DataError("not a seqlab model file: " + path);
    f.version = static_cast<int>(parse_long(std::string_view(line).substr(14), path));
    if (f.version != 1) {
        throw DataError("unsupported model file version " + std::to_string(f.version));
    }

    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") {
            saw_end = true;
            break;
        } else if (tag == "kind") {
            ls >> f.kind;
        } else if (tag == "labels") {
            // count only; entries follow as label lines
        } else if (tag == "label") {
            int idx = 0;
            ls >> idx;
            std::string name;
            std::getline(ls, name);
            if (!name.empty() && name.front() == ' ') name.erase(name.begin());
            if (idx != static_cast<int>(f.labels.size())) {
                throw DataError("label indices out of order in model file");
            }
            f.labels.push_back(name);
        } else if (tag == "scalar") {
            std::string key, value;
            ls >> key >> value;
            f.set_scalar(key, value);
        } else if (tag == "block") {
            std::string name;
            long rows = 0, cols = 0;
            ls >> name >> rows >> cols;
            if (rows < 0 || cols < 0) throw DataError("bad block header in model file");
            Eigen::MatrixXd m(rows, cols);
            for (long i = 0; i < rows; ++i) {
                if (!std::getline(in, line)) throw DataError("truncated block '" + name + "'");
                std::istringstream rs(line);
                std::string token;
                for (long j = 0; j < cols; ++j) {
                    if (!(rs >> token)) throw DataError("short row in block '" + name + "'");
                    m(i, j) = parse_double(token, "block " + name);
                }
            }
            f.set_block(name, std::move(m));
        } else {
            throw DataError("unknown model file entry '" + tag + "'");
        }
    }
    if (!saw_end) throw DataError("model file missing 'end' terminator: " + path);
    if (f.kind.empty()) throw DataError("model file has no kind: " + path);
    return f;
}

namespace {

void put_common(ModelFile& f, const LabelAlphabet& alphabet, double l2) {
    f.labels = alphabet.names();
    f.set_scalar("l2", format_double(l2));
}

void put_scaler(ModelFile& f, const std::optional<Scaler>& scaler) {
    if (!scaler) return;
    f.set_block("scaler_mean", scaler->mean.transpose());
    f.set_block("scaler_scale", scaler->scale.transpose());
}

std::optional<Scaler> get_scaler(const ModelFile& f) {
    if (!f.has_block("scaler_mean")) return std::nullopt;
    Scaler s;
    s.mean = f.block("scaler_mean").row(0).transpose();
    s.scale = f.block("scaler_scale").row(0).transpose();
    return s;
}

const char* activation_name(cnf::Activation a) {
    return a == cnf::Activation::Logistic ? "logistic" : "identity";
}

cnf::Activation activation_from(const std::string& s) {
    if (s == "logistic") return cnf::Activation::Logistic;
    if (s == "identity") return cnf::Activation::Identity;
    throw DataError("unknown gate activation '" + s + "'");
}

ModelFile to_file(const crf::CrfModel& m) {
    ModelFile f;
    f.kind = "crf";
    put_common(f, m.alphabet, m.l2);
    f.set_block("state", m.state);
    f.set_block("trans", m.trans);
    f.set_block("bias", m.bias.transpose());
    return f;
}

ModelFile to_file(const cnf::CnfModel& m) {
    ModelFile f;
    f.kind = "cnf";
    put_common(f, m.alphabet, m.l2);
    f.set_scalar("activation", activation_name(m.gate.activation));
    f.set_block("state", m.state);
    f.set_block("trans", m.trans);
    f.set_block("bias", m.bias.transpose());
    f.set_block("gate", m.gate.weights);
    return f;
}

ModelFile to_file(const latent::LatentModel& m) {
    ModelFile f;
    switch (m.variant) {
        case latent::Variant::Hcrf: f.kind = "hcrf"; break;
        case latent::Variant::Ldcrf: f.kind = "ldcrf"; break;
        case latent::Variant::Ldcnf: f.kind = "ldcnf"; break;
    }
    put_common(f, m.alphabet, m.l2);
    f.set_scalar("hidden_per_label", std::to_string(m.hidden.per_label));
    f.set_block("state", m.state);
    f.set_block("trans", m.trans);
    f.set_block("bias", m.bias.transpose());
    if (m.variant == latent::Variant::Hcrf) {
        f.set_scalar("window", std::to_string(m.window));
        f.set_block("compat", m.compat);
    }
    if (m.variant == latent::Variant::Ldcnf) {
        f.set_scalar("activation", activation_name(m.gate.activation));
        f.set_block("gate", m.gate.weights);
    }
    return f;
}

ModelFile to_file(const hmm::HmmModel& m) {
    ModelFile f;
    f.kind = "hmm";
    f.labels = m.alphabet.names();
    f.set_block("initial", m.initial.transpose());
    f.set_block("trans", m.trans);
    f.set_block("mean", m.mean);
    f.set_block("var", m.var);
    return f;
}

AnyModel model_from_file(const ModelFile& f) {
    const LabelAlphabet alphabet{f.labels};
    if (f.kind == "crf") {
        crf::CrfModel m;
        m.alphabet = alphabet;
        m.l2 = parse_double(f.scalar("l2"), "l2");
        m.state = f.block("state");
        m.trans = f.block("trans");
        m.bias = f.block("bias").row(0).transpose();
        return m;
    }
    if (f.kind == "cnf") {
        cnf::CnfModel m;
        m.alphabet = alphabet;
        m.l2 = parse_double(f.scalar("l2"), "l2");
        m.state = f.block("state");
        m.trans = f.block("trans");
        m.bias = f.block("bias").row(0).transpose();
        m.gate.weights = f.block("gate");
        m.gate.activation = activation_from(f.scalar("activation"));
        return m;
    }
    if (f.kind == "hcrf" || f.kind == "ldcrf" || f.kind == "ldcnf") {
        latent::LatentModel m;
        m.variant = f.kind == "hcrf"    ? latent::Variant::Hcrf
                    : f.kind == "ldcrf" ? latent::Variant::Ldcrf
                                        : latent::Variant::Ldcnf;
        m.alphabet = alphabet;
        m.l2 = parse_double(f.scalar("l2"), "l2");
        m.hidden.num_labels = alphabet.size();
        m.hidden.per_label = static_cast<int>(parse_long(f.scalar("hidden_per_label"), "r"));
        m.state = f.block("state");
        m.trans = f.block("trans");
        m.bias = f.block("bias").row(0).transpose();
        if (m.variant == latent::Variant::Hcrf) {
            m.window = static_cast<int>(parse_long(f.scalar("window"), "window"));
            m.compat = f.block("compat");
        }
        if (m.variant == latent::Variant::Ldcnf) {
            m.gate.weights = f.block("gate");
            m.gate.activation = activation_from(f.scalar("activation"));
        }
        return m;
    }
    if (f.kind == "hmm") {
        hmm::HmmModel m;
        m.alphabet = alphabet;
        m.initial = f.block("initial").row(0).transpose();
        m.trans = f.block("trans");
        m.mean = f.block("mean");
        m.var = f.block("var");
        return m;
    }
    throw DataError("unknown model kind '" + f.kind + "'");
}

}  // namespace

void save_model(const SavedModel& m, const std::string& path) {
    ModelFile f = std::visit([](const auto& model) { return to_file(model); }, m.model);
    put_scaler(f, m.scaler);
    write_model_file(f, path);
}

SavedModel load_model(const std::string& path) {
    const ModelFile f = read_model_file(path);
    SavedModel out{model_from_file(f), get_scaler(f)};
    return out;
}

std::string kind_of(const AnyModel& m) {
    return std::visit(
        [](const auto& model) -> std::string {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, crf::CrfModel>) {
                return "crf";
            } else if constexpr (std::is_same_v<T, cnf::CnfModel>) {
                return "cnf";
            } else if constexpr (std::is_same_v<T, latent::LatentModel>) {
                switch (model.variant) {
                    case latent::Variant::Hcrf: return "hcrf";
                    case latent::Variant::Ldcrf: return "ldcrf";
                    case latent::Variant::Ldcnf: return "ldcnf";
                }
                return "latent";
            } else {
                return "hmm";
            }
        },
        m);
}

const LabelAlphabet& alphabet_of(const AnyModel& m) {
    return std::visit([](const auto& model) -> const LabelAlphabet& { return model.alphabet; }, m);
}

LabelSequence predict(const SavedModel& m, const ObservationSequence& x) {
    ObservationSequence scaled = x;
    if (m.scaler) {
        scaled.epochs = (x.epochs.rowwise() - m.scaler->mean.transpose()).array().rowwise() /
                        m.scaler->scale.transpose().array();
    }
    return std::visit(
        [&](const auto& model) -> LabelSequence {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, crf::CrfModel>) {
                return crf::predict(model, scaled);
            } else if constexpr (std::is_same_v<T, cnf::CnfModel>) {
                return cnf::predict(model, scaled);
            } else if constexpr (std::is_same_v<T, latent::LatentModel>) {
                return latent::predict(model, scaled);
            } else {
                return hmm::decode(model, scaled);
            }
        },
        m.model);
}

}  // namespace seqlab::io
