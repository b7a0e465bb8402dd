#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "seqlab/hmm.hpp"
#include "seqlab/model_io.hpp"
#include "test_util.hpp"

using namespace seqlab;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("crf model round-trips bit-exactly, scaler included") {
    io::SavedModel saved;
    saved.model = testutil::random_crf(3, 4, 0.02, 7);
    Scaler scaler;
    scaler.mean = Eigen::VectorXd::Random(4);
    scaler.scale = Eigen::VectorXd::Random(4).cwiseAbs() + Eigen::VectorXd::Ones(4);
    saved.scaler = scaler;

    const auto path = temp_path("seqlab_model_crf.txt");
    io::save_model(saved, path);
    const io::SavedModel back = io::load_model(path);

    REQUIRE(io::kind_of(back.model) == "crf");
    const auto& a = std::get<crf::CrfModel>(saved.model);
    const auto& b = std::get<crf::CrfModel>(back.model);
    CHECK((a.state.array() == b.state.array()).all());
    CHECK((a.trans.array() == b.trans.array()).all());
    CHECK((a.bias.array() == b.bias.array()).all());
    CHECK(a.l2 == b.l2);
    CHECK(a.alphabet == b.alphabet);
    REQUIRE(back.scaler.has_value());
    CHECK((back.scaler->mean.array() == scaler.mean.array()).all());
    CHECK((back.scaler->scale.array() == scaler.scale.array()).all());
}

TEST_CASE("cnf model keeps its gate block and activation tag") {
    io::SavedModel saved;
    saved.model = testutil::random_cnf(3, 4, 2, 0.01, 9);
    const auto path = temp_path("seqlab_model_cnf.txt");
    io::save_model(saved, path);
    const io::SavedModel back = io::load_model(path);
    REQUIRE(io::kind_of(back.model) == "cnf");
    const auto& a = std::get<cnf::CnfModel>(saved.model);
    const auto& b = std::get<cnf::CnfModel>(back.model);
    CHECK((a.gate.weights.array() == b.gate.weights.array()).all());
    CHECK(b.gate.activation == cnf::Activation::Logistic);
    CHECK((a.state.array() == b.state.array()).all());
}

TEST_CASE("latent variants carry their tag, hidden map and extras") {
    for (auto variant : {latent::Variant::Hcrf, latent::Variant::Ldcrf, latent::Variant::Ldcnf}) {
        io::SavedModel saved;
        saved.model = testutil::random_latent(variant, 3, 2, 2, 2, 5, 0.01, 11);
        const auto path = temp_path("seqlab_model_latent.txt");
        io::save_model(saved, path);
        const io::SavedModel back = io::load_model(path);
        const auto& a = std::get<latent::LatentModel>(saved.model);
        const auto& b = std::get<latent::LatentModel>(back.model);
        CHECK(a.variant == b.variant);
        CHECK(b.hidden.per_label == 2);
        CHECK(b.hidden.num_labels == 3);
        CHECK((a.state.array() == b.state.array()).all());
        CHECK((a.trans.array() == b.trans.array()).all());
        if (variant == latent::Variant::Hcrf) {
            CHECK(b.window == 5);
            CHECK((a.compat.array() == b.compat.array()).all());
        }
        if (variant == latent::Variant::Ldcnf) {
            CHECK((a.gate.weights.array() == b.gate.weights.array()).all());
        }
    }
}

TEST_CASE("hmm parameter dump round-trips") {
    const Dataset d = testutil::random_dataset(3, 2, {20}, 13);
    io::SavedModel saved;
    saved.model = hmm::fit_supervised(d);
    const auto path = temp_path("seqlab_model_hmm.txt");
    io::save_model(saved, path);
    const io::SavedModel back = io::load_model(path);
    REQUIRE(io::kind_of(back.model) == "hmm");
    const auto& a = std::get<hmm::HmmModel>(saved.model);
    const auto& b = std::get<hmm::HmmModel>(back.model);
    CHECK((a.initial.array() == b.initial.array()).all());
    CHECK((a.trans.array() == b.trans.array()).all());
    CHECK((a.mean.array() == b.mean.array()).all());
    CHECK((a.var.array() == b.var.array()).all());
}

TEST_CASE("prediction through a saved model applies the stored scaler") {
    const Dataset raw = testutil::random_dataset(2, 2, {12}, 17);
    const auto [scaled, scaler] = standardize(raw, raw);
    const crf::CrfModel model = testutil::random_crf(2, 2, 0.0, 19);

    io::SavedModel saved;
    saved.model = model;
    saved.scaler = scaler;
    const auto path = temp_path("seqlab_model_pred.txt");
    io::save_model(saved, path);
    const io::SavedModel back = io::load_model(path);

    // decoding raw features through the saved scaler equals decoding the
    // standardized features directly
    const LabelSequence via_saved = io::predict(back, raw.sequences[0].x);
    const LabelSequence direct = crf::predict(model, scaled.sequences[0].x);
    CHECK(via_saved == direct);
}

TEST_CASE("label names with spaces survive the round trip") {
    LabelAlphabet alphabet;
    alphabet.add("slow wave sleep");
    alphabet.add("rapid eye movement");
    crf::CrfModel model = crf::zero_model(alphabet, 1, 0.0);
    io::SavedModel saved;
    saved.model = model;
    const auto path = temp_path("seqlab_model_spaces.txt");
    io::save_model(saved, path);
    const io::SavedModel back = io::load_model(path);
    CHECK(io::alphabet_of(back.model).name(0) == "slow wave sleep");
    CHECK(io::alphabet_of(back.model).name(1) == "rapid eye movement");
}

TEST_CASE("malformed model files are data errors") {
    const auto path = temp_path("seqlab_model_bad.txt");
    {
        std::ofstream out(path);
        out << "not a model\n";
    }
    CHECK_THROWS_AS(io::load_model(path), DataError);
    {
        std::ofstream out(path);
        out << "seqlab-model v1\nkind crf\n";  // no end marker, no blocks
    }
    CHECK_THROWS_AS(io::load_model(path), DataError);
    CHECK_THROWS_AS(io::load_model("/nonexistent/model.txt"), DataError);
}
