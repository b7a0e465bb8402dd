#include <doctest.h>

#include <cmath>

#include "seqlab/chain.hpp"
#include "seqlab/error.hpp"
#include "test_util.hpp"

using namespace seqlab;
using chain::ChainPotentials;

namespace {

ChainPotentials zeros(int n, int S) {
    ChainPotentials p;
    p.node = Eigen::MatrixXd::Zero(n, S);
    p.edge = Eigen::MatrixXd::Zero(S, S);
    return p;
}

}  // namespace

TEST_CASE("uniform chains have log Z = n log S") {
    CHECK(chain::log_forward(zeros(1, 2)).log_partition == doctest::Approx(std::log(2.0)));
    CHECK(chain::log_forward(zeros(3, 2)).log_partition ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("forward matches enumeration on random instances") {
    const ChainPotentials p = testutil::random_potentials(4, 3, 77);
    const auto oracle = testutil::enumerate_chain(p);
    CHECK(chain::log_forward(p).log_partition == doctest::Approx(oracle.log_z).epsilon(1e-10));
    CHECK(chain::brute_force_log_partition(p) == doctest::Approx(oracle.log_z).epsilon(1e-12));
}

TEST_CASE("forward rejects NaN potentials") {
    ChainPotentials p = zeros(2, 2);
    p.node(0, 0) = std::nan("");
    CHECK_THROWS_AS(chain::log_forward(p), InputError);
}

TEST_CASE("forward tolerates -inf node masks but not +inf") {
    ChainPotentials p = zeros(2, 2);
    p.node(0, 1) = -std::numeric_limits<double>::infinity();
    // paths through state 1 at position 0 are excluded: 2 paths remain
    CHECK(chain::log_forward(p).log_partition == doctest::Approx(std::log(2.0)));
    p.node(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(chain::log_forward(p), InputError);
}

TEST_CASE("no overflow for scores up to 700") {
    ChainPotentials p = zeros(6, 3);
    p.node.setConstant(700.0);
    p.edge.setConstant(-700.0);
    const double log_z = chain::log_forward(p).log_partition;
    CHECK(std::isfinite(log_z));
}

TEST_CASE("backward table recombines to the partition at every position") {
    const ChainPotentials p = testutil::random_potentials(5, 3, 13);
    const auto fwd = chain::log_forward(p);
    const Eigen::MatrixXd beta = chain::log_backward(p);

    CHECK(chain::log_backward(zeros(1, 4)).isZero());

    for (int t = 0; t < p.length(); ++t) {
        const double recombined =
            chain::log_sum_exp((fwd.alpha.row(t) + beta.row(t)).transpose());
        CHECK(recombined == doctest::Approx(fwd.log_partition).epsilon(1e-10));
    }
    CHECK(fwd.log_partition ==
          doctest::Approx(testutil::enumerate_chain(p).log_z).epsilon(1e-10));
}

TEST_CASE("marginals: uniform potentials give 1/S everywhere") {
    const auto marg = chain::marginals(zeros(4, 5));
    for (int t = 0; t < 4; ++t)
        for (int s = 0; s < 5; ++s) CHECK(marg.node(t, s) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("marginals match enumeration and stay consistent") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ChainPotentials p = testutil::random_potentials(4, 3, seed);
        const auto marg = chain::marginals(p);
        const auto oracle = testutil::enumerate_chain(p);

        for (int t = 0; t < 4; ++t) {
            CHECK(marg.node.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
            for (int s = 0; s < 3; ++s) {
                CHECK(marg.node(t, s) ==
                      doctest::Approx(oracle.node_marginals(t, s)).epsilon(1e-10));
            }
        }
        // edge marginals sum onto both adjacent node marginals
        for (int t = 0; t + 1 < 4; ++t) {
            for (int a = 0; a < 3; ++a) {
                CHECK(marg.edge[t].row(a).sum() ==
                      doctest::Approx(marg.node(t, a)).epsilon(1e-10));
                CHECK(marg.edge[t].col(a).sum() ==
                      doctest::Approx(marg.node(t + 1, a)).epsilon(1e-10));
                for (int b = 0; b < 3; ++b) {
                    CHECK(marg.edge[t](a, b) ==
                          doctest::Approx(oracle.edge_marginals[t](a, b)).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("viterbi picks dominating states and breaks ties to the smallest index") {
    ChainPotentials p = zeros(4, 3);
    p.node.col(1).setConstant(1.0);
    const auto v = chain::viterbi(p);
    CHECK(v.path == std::vector<int>{1, 1, 1, 1});
    CHECK(v.score == doctest::Approx(4.0));

    const auto tie = chain::viterbi(zeros(5, 3));
    CHECK(tie.path == std::vector<int>{0, 0, 0, 0, 0});
}

TEST_CASE("viterbi equals enumerated argmax on random instances") {
    for (std::uint64_t seed : {10u, 20u, 30u}) {
        const ChainPotentials p = testutil::random_potentials(5, 3, seed);
        const auto v = chain::viterbi(p);
        const auto oracle = testutil::enumerate_chain(p);
        CHECK(v.score == doctest::Approx(oracle.best_score).epsilon(1e-12));
        CHECK(v.path == oracle.best_path);
    }
}

TEST_CASE("brute force agrees with forward on many small instances") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int n = 1 + static_cast<int>(seed % 5);
        const int S = 2 + static_cast<int>(seed % 3);
        const ChainPotentials p = testutil::random_potentials(n, S, 1000 + seed);
        CHECK(chain::brute_force_log_partition(p) ==
              doctest::Approx(chain::log_forward(p).log_partition).epsilon(1e-9));
    }
}

TEST_CASE("brute force refuses oversized instances") {
    CHECK(chain::brute_force_log_partition(zeros(1, 2)) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(chain::brute_force_log_partition(zeros(20, 5)), InputError);
}

TEST_CASE("shifting one position's node scores shifts log Z and nothing else") {
    const ChainPotentials p = testutil::random_potentials(5, 3, 4242);
    ChainPotentials shifted = p;
    const double c = 2.75;
    shifted.node.row(2).array() += c;

    CHECK(chain::log_forward(shifted).log_partition ==
          doctest::Approx(chain::log_forward(p).log_partition + c).epsilon(1e-12));

    const auto m0 = chain::marginals(p);
    const auto m1 = chain::marginals(shifted);
    CHECK((m0.node - m1.node).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(chain::viterbi(p).path == chain::viterbi(shifted).path);
}
