#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "seqlab/dataset.hpp"
#include "test_util.hpp"

using namespace seqlab;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_dataset assembles sequences in epoch order") {
    const auto path = write_temp("seqlab_load_basic.csv",
                                 "sequence_id,epoch_index,f1,f2,label\n"
                                 "A,0,1.0,2.0,wake\n"
                                 "A,2,5.0,6.0,rem\n"
                                 "A,1,3.0,4.0,wake\n"
                                 "B,0,7.0,8.0,rem\n"
                                 "B,1,9.0,10.0,wake\n");
    const Dataset d = load_dataset(path);
    REQUIRE(d.num_sequences() == 2);
    CHECK(d.dim == 2);
    CHECK(d.sequences[0].x.id == "A");
    CHECK(d.sequences[0].x.length() == 3);
    CHECK(d.sequences[1].x.length() == 2);
    // row for epoch 1 was listed after epoch 2 but must land in the middle
    CHECK(d.sequences[0].x.epochs(1, 0) == 3.0);
    // alphabet order = first appearance: wake then rem
    CHECK(d.alphabet.name(0) == "wake");
    CHECK(d.alphabet.name(1) == "rem");
    CHECK(d.sequences[0].y.labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("load_dataset builds the five-stage alphabet from data") {
    const auto path = write_temp("seqlab_load_stages.csv",
                                 "sequence_id,epoch_index,f1,label\n"
                                 "n1,0,0.1,Awake\n"
                                 "n1,1,0.2,S1\n"
                                 "n1,2,0.3,S2\n"
                                 "n1,3,0.4,SWS\n"
                                 "n1,4,0.5,REM\n");
    const Dataset d = load_dataset(path);
    CHECK(d.alphabet.size() == 5);
    CHECK(d.alphabet.names() == std::vector<std::string>{"Awake", "S1", "S2", "SWS", "REM"});
}

TEST_CASE("load_dataset error paths") {
    SUBCASE("non-finite feature value") {
        const auto path = write_temp("seqlab_load_nan.csv",
                                     "sequence_id,epoch_index,f1,label\n"
                                     "A,0,NaN,w\n");
        CHECK_THROWS_AS(load_dataset(path), DataError);
    }
    SUBCASE("ragged row") {
        const auto path = write_temp("seqlab_load_ragged.csv",
                                     "sequence_id,epoch_index,f1,f2,label\n"
                                     "A,0,1.0,w\n");
        CHECK_THROWS_AS(load_dataset(path), SchemaError);
    }
    SUBCASE("duplicate sequence and epoch index") {
        const auto path = write_temp("seqlab_load_dup.csv",
                                     "sequence_id,epoch_index,f1,label\n"
                                     "A,3,1.0,w\n"
                                     "A,3,2.0,w\n");
        CHECK_THROWS_AS(load_dataset(path), DataError);
    }
    SUBCASE("missing header") {
        const auto path = write_temp("seqlab_load_nohdr.csv", "A,0,1.0,w\n");
        CHECK_THROWS_AS(load_dataset(path), SchemaError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_dataset("/nonexistent/seqlab.csv"), DataError);
    }
}

TEST_CASE("dataset CSV round-trip is exact") {
    const Dataset d = testutil::random_dataset(3, 4, {5, 2, 7}, 99);
    const auto path = (std::filesystem::temp_directory_path() / "seqlab_roundtrip.csv").string();
    save_dataset(d, path);
    const Dataset back = load_dataset(path);
    CHECK(back == d);
}

TEST_CASE("standardize two-point column to minus one and plus one") {
    Dataset d;
    d.alphabet = testutil::alphabet_of_size(2);
    d.dim = 1;
    LabeledSequence s;
    s.x.id = "a";
    s.x.epochs.resize(2, 1);
    s.x.epochs << 1.0, 3.0;
    s.y.labels = {0, 1};
    d.sequences.push_back(s);

    const auto [scaled, scaler] = standardize(d, d);
    CHECK(scaled.sequences[0].x.epochs(0, 0) == doctest::Approx(-1.0));
    CHECK(scaled.sequences[0].x.epochs(1, 0) == doctest::Approx(1.0));
    CHECK(scaler.mean(0) == doctest::Approx(2.0));
}

TEST_CASE("standardize leaves constant columns centered but unscaled") {
    Dataset d;
    d.alphabet = testutil::alphabet_of_size(2);
    d.dim = 2;
    LabeledSequence s;
    s.x.id = "a";
    s.x.epochs.resize(3, 2);
    s.x.epochs << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
    s.y.labels = {0, 1, 0};
    d.sequences.push_back(s);

    const auto [scaled, scaler] = standardize(d, d);
    CHECK(scaler.scale(0) == 1.0);  // zero-variance guard
    for (int t = 0; t < 3; ++t) CHECK(scaled.sequences[0].x.epochs(t, 0) == doctest::Approx(0.0));
}

TEST_CASE("held-out data is scaled with training statistics") {
    // independent recomputation on a two-sequence toy
    Dataset train = testutil::random_dataset(2, 3, {6}, 11);
    Dataset heldout = testutil::random_dataset(2, 3, {4}, 12);

    const auto [scaled, scaler] = standardize(train, heldout);

    const Eigen::MatrixXd all = train.stack_epochs();
    for (int j = 0; j < 3; ++j) {
        const double mu = all.col(j).mean();
        const double var = (all.col(j).array() - mu).square().mean();
        const double sd = std::sqrt(var);
        for (int t = 0; t < 4; ++t) {
            const double expected = (heldout.sequences[0].x.epochs(t, j) - mu) / sd;
            CHECK(scaled.sequences[0].x.epochs(t, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("standardize(train, train) yields zero mean and unit variance") {
    const Dataset d = testutil::random_dataset(3, 5, {9, 14, 7}, 21);
    const auto [scaled, scaler] = standardize(d, d);
    const Eigen::MatrixXd all = scaled.stack_epochs();
    for (int j = 0; j < 5; ++j) {
        const double mu = all.col(j).mean();
        const double var = (all.col(j).array() - mu).square().mean();
        CHECK(std::abs(mu) < 1e-10);
        CHECK(std::abs(var - 1.0) < 1e-10);
    }
}

TEST_CASE("split_folds gives one test sequence per fold at k = n") {
    const Dataset d = testutil::random_dataset(2, 2, std::vector<int>(10, 3), 5);
    const FoldSplit split = split_folds(d, 10, 42);
    for (int f = 0; f < 10; ++f) CHECK(split.test_indices(d, f).size() == 1);
}

TEST_CASE("split_folds is deterministic and partitions the sequences") {
    const Dataset d = testutil::random_dataset(2, 2, std::vector<int>(7, 3), 5);
    const FoldSplit a = split_folds(d, 3, 123);
    const FoldSplit b = split_folds(d, 3, 123);
    CHECK(a.assignment == b.assignment);

    std::set<int> seen;
    std::size_t total = 0;
    int min_size = 1 << 30, max_size = 0;
    for (int f = 0; f < 3; ++f) {
        const auto test = a.test_indices(d, f);
        total += test.size();
        for (int i : test) CHECK(seen.insert(i).second);  // pairwise disjoint
        min_size = std::min(min_size, static_cast<int>(test.size()));
        max_size = std::max(max_size, static_cast<int>(test.size()));
    }
    CHECK(total == 7);  // union covers everything
    CHECK(max_size - min_size <= 1);
}

TEST_CASE("split_folds rejects more folds than sequences") {
    const Dataset d = testutil::random_dataset(2, 2, std::vector<int>(5, 3), 5);
    CHECK_THROWS_AS(split_folds(d, 10, 1), ConfigError);
    CHECK_THROWS_AS(split_folds(d, 1, 1), ConfigError);
}

TEST_CASE("expand_context concatenates neighbours with edge repetition") {
    Dataset d;
    d.alphabet = testutil::alphabet_of_size(2);
    d.dim = 1;
    LabeledSequence s;
    s.x.id = "a";
    s.x.epochs.resize(3, 1);
    s.x.epochs << 1.0, 2.0, 3.0;
    s.y.labels = {0, 1, 0};
    d.sequences.push_back(s);

    const Dataset e = expand_context(d, 1);
    CHECK(e.dim == 3);
    // first epoch repeats itself on the left edge
    CHECK(e.sequences[0].x.epochs(0, 0) == 1.0);
    CHECK(e.sequences[0].x.epochs(0, 1) == 1.0);
    CHECK(e.sequences[0].x.epochs(0, 2) == 2.0);
    CHECK(e.sequences[0].x.epochs(1, 0) == 1.0);
    CHECK(e.sequences[0].x.epochs(1, 1) == 2.0);
    CHECK(e.sequences[0].x.epochs(1, 2) == 3.0);
    CHECK(e.sequences[0].x.epochs(2, 2) == 3.0);

    CHECK(expand_context(d, 0) == d);
}

TEST_CASE("chunk_sequences splits long sequences and keeps short ones") {
    const Dataset d = testutil::random_dataset(2, 2, {10, 4}, 3);
    const Dataset c = chunk_sequences(d, 4);
    REQUIRE(c.num_sequences() == 4);  // 10 -> 4+4+2, 4 stays whole
    CHECK(c.sequences[0].x.id == "r0#0");
    CHECK(c.sequences[2].x.length() == 2);
    CHECK(c.sequences[3].x.id == "r1");
    CHECK(c.total_epochs() == d.total_epochs());
}
