#include "seqlab/dataset.hpp"

#include <algorithm>
#include <set>
#include <cmath>
#include <fstream>
#include <sstream>

#include "seqlab/rng.hpp"
#include "seqlab/text.hpp"

namespace seqlab {

LabelAlphabet::LabelAlphabet(std::vector<std::string> names) {
    for (auto& n : names) add(n);
}

const std::string& LabelAlphabet::name(int index) const {
    if (index < 0 || index >= size()) {
        throw InputError("label index " + std::to_string(index) + " out of range");
    }
    return names_[static_cast<std::size_t>(index)];
}

std::optional<int> LabelAlphabet::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int LabelAlphabet::add(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const int idx = size();
    names_.push_back(name);
    index_[name] = idx;
    return idx;
}

long Dataset::total_epochs() const {
    long n = 0;
    for (const auto& s : sequences) n += s.x.length();
    return n;
}

void Dataset::validate() const {
    for (const auto& s : sequences) {
        if (s.x.dim() != dim) {
            throw InputError("sequence '" + s.x.id + "' has dimension " +
                             std::to_string(s.x.dim()) + ", dataset has " + std::to_string(dim));
        }
        if (s.x.length() < 1) throw InputError("sequence '" + s.x.id + "' is empty");
        if (s.x.length() != s.y.length()) {
            throw InputError("sequence '" + s.x.id + "' has misaligned labels");
        }
        if (!s.x.epochs.allFinite()) {
            throw InputError("sequence '" + s.x.id + "' contains non-finite features");
        }
        for (int l : s.y.labels) {
            if (l < 0 || l >= alphabet.size()) {
                throw InputError("sequence '" + s.x.id + "' has label index out of range");
            }
        }
    }
}

Eigen::MatrixXd Dataset::stack_epochs() const {
    Eigen::MatrixXd out(total_epochs(), dim);
    long row = 0;
    for (const auto& s : sequences) {
        out.middleRows(row, s.x.length()) = s.x.epochs;
        row += s.x.length();
    }
    return out;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
    Dataset out;
    out.alphabet = alphabet;
    out.dim = dim;
    out.sequences.reserve(indices.size());
    for (int i : indices) {
        out.sequences.push_back(sequences.at(static_cast<std::size_t>(i)));
    }
    return out;
}

bool exact_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (a.size() == 0) return true;
    return (a.array() == b.array()).all();
}

bool operator==(const ObservationSequence& a, const ObservationSequence& b) {
    return a.id == b.id && exact_equal(a.epochs, b.epochs);
}

bool operator==(const LabeledSequence& a, const LabeledSequence& b) {
    return a.x == b.x && a.y == b.y;
}

bool operator==(const Dataset& a, const Dataset& b) {
    // label indices are compared through their names: the alphabet is
    // first-appearance ordered, so reloading may permute indices without
    // changing the data
    if (a.dim != b.dim || a.sequences.size() != b.sequences.size()) return false;
    if (std::set<std::string>(a.alphabet.names().begin(), a.alphabet.names().end()) !=
        std::set<std::string>(b.alphabet.names().begin(), b.alphabet.names().end())) {
        return false;
    }
    for (std::size_t i = 0; i < a.sequences.size(); ++i) {
        const auto& sa = a.sequences[i];
        const auto& sb = b.sequences[i];
        if (!(sa.x == sb.x) || sa.y.length() != sb.y.length()) return false;
        for (int t = 0; t < sa.y.length(); ++t) {
            if (a.alphabet.name(sa.y.labels[static_cast<std::size_t>(t)]) !=
                b.alphabet.name(sb.y.labels[static_cast<std::size_t>(t)])) {
                return false;
            }
        }
    }
    return true;
}

std::vector<int> FoldSplit::test_indices(const Dataset& d, int fold) const {
    std::vector<int> out;
    for (int i = 0; i < d.num_sequences(); ++i) {
        auto it = assignment.find(d.sequences[static_cast<std::size_t>(i)].x.id);
        if (it == assignment.end()) {
            throw InputError("sequence '" + d.sequences[static_cast<std::size_t>(i)].x.id +
                             "' has no fold assignment");
        }
        if (it->second == fold) out.push_back(i);
    }
    return out;
}

std::vector<int> FoldSplit::train_indices(const Dataset& d, int fold) const {
    std::vector<int> out;
    for (int i = 0; i < d.num_sequences(); ++i) {
        auto it = assignment.find(d.sequences[static_cast<std::size_t>(i)].x.id);
        if (it == assignment.end()) {
            throw InputError("sequence '" + d.sequences[static_cast<std::size_t>(i)].x.id +
                             "' has no fold assignment");
        }
        if (it->second != fold) out.push_back(i);
    }
    return out;
}

namespace {

struct RawRow {
    long epoch_index;
    Eigen::VectorXd features;
    int label;
};

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty dataset file: " + path);
    line = strip_cr(line);

    const auto header = split_csv_line(line);
    if (header.size() < 4) {
        throw SchemaError("header must be sequence_id,epoch_index,f1,...,fm,label");
    }
    if (header.front() != "sequence_id" || header[1] != "epoch_index" ||
        header.back() != "label") {
        throw SchemaError("header must be sequence_id,epoch_index,f1,...,fm,label");
    }
    const int m = static_cast<int>(header.size()) - 3;

    Dataset d;
    d.dim = m;
    std::map<std::string, std::vector<RawRow>> rows;
    std::vector<std::string> id_order;

    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (static_cast<int>(fields.size()) != m + 3) {
            throw SchemaError("ragged row with " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(m + 3) + " (" + where + ")");
        }
        RawRow r;
        const std::string id(fields[0]);
        if (id.empty()) throw DataError("empty sequence_id (" + where + ")");
        r.epoch_index = parse_long(fields[1], where);
        r.features.resize(m);
        for (int j = 0; j < m; ++j) {
            const double v = parse_double(fields[static_cast<std::size_t>(j) + 2], where);
            if (!std::isfinite(v)) throw DataError("non-finite feature value (" + where + ")");
            r.features(j) = v;
        }
        const std::string label_name(fields.back());
        if (label_name.empty()) throw DataError("empty label (" + where + ")");
        r.label = d.alphabet.add(label_name);

        auto it = rows.find(id);
        if (it == rows.end()) {
            id_order.push_back(id);
            it = rows.emplace(id, std::vector<RawRow>{}).first;
        }
        it->second.push_back(std::move(r));
    }
    if (id_order.empty()) throw DataError("dataset has no data rows: " + path);

    for (const auto& id : id_order) {
        auto& rs = rows[id];
        std::stable_sort(rs.begin(), rs.end(),
                         [](const RawRow& a, const RawRow& b) { return a.epoch_index < b.epoch_index; });
        for (std::size_t i = 1; i < rs.size(); ++i) {
            if (rs[i].epoch_index == rs[i - 1].epoch_index) {
                throw DataError("duplicate epoch_index " + std::to_string(rs[i].epoch_index) +
                                " in sequence '" + id + "'");
            }
        }
        LabeledSequence s;
        s.x.id = id;
        s.x.epochs.resize(static_cast<long>(rs.size()), m);
        s.y.labels.resize(rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            s.x.epochs.row(static_cast<long>(i)) = rs[i].features.transpose();
            s.y.labels[i] = rs[i].label;
        }
        d.sequences.push_back(std::move(s));
    }
    d.validate();
    return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
    d.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << "sequence_id,epoch_index";
    for (int j = 1; j <= d.dim; ++j) out << ",f" << j;
    out << ",label\n";
    for (const auto& s : d.sequences) {
        for (int n = 0; n < s.x.length(); ++n) {
            out << s.x.id << ',' << n;
            for (int j = 0; j < d.dim; ++j) out << ',' << format_double(s.x.epochs(n, j));
            out << ',' << d.alphabet.name(s.y.labels[static_cast<std::size_t>(n)]) << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

Scaler fit_scaler(const Dataset& train) {
    if (train.num_sequences() == 0) throw InputError("cannot fit scaler on empty dataset");
    const Eigen::MatrixXd all = train.stack_epochs();
    const auto n = static_cast<double>(all.rows());
    Scaler s;
    s.mean = all.colwise().mean();
    const Eigen::MatrixXd centered = all.rowwise() - s.mean.transpose();
    Eigen::VectorXd var = centered.array().square().colwise().sum() / n;
    s.scale.resize(var.size());
    for (int j = 0; j < var.size(); ++j) {
        // zero-variance columns pass through unscaled
        s.scale(j) = var(j) > 0.0 ? std::sqrt(var(j)) : 1.0;
    }
    return s;
}

Dataset apply_scaler(const Scaler& s, const Dataset& d) {
    if (s.mean.size() != d.dim) {
        throw SchemaError("scaler dimension " + std::to_string(s.mean.size()) +
                          " does not match dataset dimension " + std::to_string(d.dim));
    }
    Dataset out = d;
    for (auto& seq : out.sequences) {
        seq.x.epochs = (seq.x.epochs.rowwise() - s.mean.transpose()).array().rowwise() /
                       s.scale.transpose().array();
    }
    return out;
}

std::pair<Dataset, Scaler> standardize(const Dataset& train, const Dataset& apply_to) {
    Scaler s = fit_scaler(train);
    return {apply_scaler(s, apply_to), std::move(s)};
}

FoldSplit split_folds(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2, got " + std::to_string(k));
    if (k > d.num_sequences()) {
        throw ConfigError("fold count " + std::to_string(k) + " exceeds sequence count " +
                          std::to_string(d.num_sequences()));
    }
    std::vector<int> order(static_cast<std::size_t>(d.num_sequences()));
    for (int i = 0; i < d.num_sequences(); ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);

    FoldSplit split;
    split.k = k;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& id = d.sequences[static_cast<std::size_t>(order[pos])].x.id;
        if (split.assignment.count(id) != 0) {
            throw DataError("duplicate sequence id '" + id + "' in dataset");
        }
        split.assignment[id] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return split;
}

Dataset expand_context(const Dataset& d, int window) {
    if (window < 0) throw ConfigError("context window must be non-negative");
    if (window == 0) return d;
    Dataset out;
    out.alphabet = d.alphabet;
    out.dim = d.dim * (2 * window + 1);
    out.sequences.reserve(d.sequences.size());
    for (const auto& s : d.sequences) {
        LabeledSequence e;
        e.x.id = s.x.id;
        e.y = s.y;
        const int n = s.x.length();
        e.x.epochs.resize(n, out.dim);
        for (int t = 0; t < n; ++t) {
            int col = 0;
            for (int off = -window; off <= window; ++off) {
                const int src = std::clamp(t + off, 0, n - 1);
                e.x.epochs.block(t, col, 1, d.dim) = s.x.epochs.row(src);
                col += d.dim;
            }
        }
        out.sequences.push_back(std::move(e));
    }
    return out;
}

Dataset chunk_sequences(const Dataset& d, int max_len) {
    if (max_len < 1) throw ConfigError("segment length must be positive");
    Dataset out;
    out.alphabet = d.alphabet;
    out.dim = d.dim;
    for (const auto& s : d.sequences) {
        const int n = s.x.length();
        if (n <= max_len) {
            out.sequences.push_back(s);
            continue;
        }
        int piece = 0;
        for (int start = 0; start < n; start += max_len, ++piece) {
            const int len = std::min(max_len, n - start);
            LabeledSequence c;
            c.x.id = s.x.id + "#" + std::to_string(piece);
            c.x.epochs = s.x.epochs.middleRows(start, len);
            c.y.labels.assign(s.y.labels.begin() + start, s.y.labels.begin() + start + len);
            out.sequences.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace seqlab
