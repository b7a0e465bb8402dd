#include <doctest.h>

#include <cmath>

#include "seqlab/crf.hpp"
#include "seqlab/error.hpp"
#include "seqlab/optimize.hpp"
#include "seqlab/rng.hpp"
#include "test_util.hpp"

using namespace seqlab;
using optim::Method;
using optim::OptimConfig;
using optim::Status;

namespace {

optim::Objective shifted_quadratic(const Eigen::VectorXd& a) {
    return [a](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * (x - a);
        return (x - a).squaredNorm();
    };
}

const optim::Objective rosenbrock = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -2.0 * a - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
};

}  // namespace

TEST_CASE("quadratic converges to the analytic minimizer") {
    Eigen::VectorXd a(3);
    a << 1.0, -2.0, 0.5;
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 5.0);
    OptimConfig cfg;
    cfg.tolerance = 1e-10;
    for (Method method : {Method::Bfgs, Method::Lbfgs, Method::Cg}) {
        cfg.method = method;
        const auto result = optim::minimize(shifted_quadratic(a), x0, cfg);
        CHECK(result.status == Status::Converged);
        CHECK((result.x - a).norm() < 1e-8);
    }
}

TEST_CASE("rosenbrock from the classic start reaches (1, 1)") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    OptimConfig cfg;
    cfg.tolerance = 1e-8;
    const auto result = optim::minimize(rosenbrock, x0, cfg);
    CHECK(result.status == Status::Converged);
    CHECK(std::abs(result.x(0) - 1.0) < 1e-6);
    CHECK(std::abs(result.x(1) - 1.0) < 1e-6);
}

TEST_CASE("accepted iterates never increase the objective") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto result = optim::minimize(rosenbrock, x0, {});
    REQUIRE(result.history.size() > 2);
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        CHECK(result.history[i] <= result.history[i - 1]);
    }
}

TEST_CASE("BFGS dispatches a convex quadratic within the 5d iteration bound") {
    const int d = 8;
    Rng rng(31);
    Eigen::MatrixXd b(d, d);
    testutil::fill_uniform(b, rng);
    const Eigen::MatrixXd q = b * b.transpose() + Eigen::MatrixXd::Identity(d, d);
    const optim::Objective f = [&q](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = q * x;
        return 0.5 * x.dot(q * x);
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(d, 3.0);
    OptimConfig cfg;
    cfg.tolerance = 1e-8;
    const auto result = optim::minimize(f, x0, cfg);
    CHECK(result.status == Status::Converged);
    CHECK(result.iterations <= 5 * d);
    CHECK(result.gradient_norm <= 1e-8);
}

TEST_CASE("same inputs give identical results") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto a = optim::minimize(rosenbrock, x0, {});
    const auto b = optim::minimize(rosenbrock, x0, {});
    CHECK(a.iterations == b.iterations);
    CHECK(a.value == b.value);
    CHECK((a.x.array() == b.x.array()).all());
}

TEST_CASE("non-finite start is an input error") {
    const optim::Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = x;
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(optim::minimize(f, Eigen::VectorXd::Zero(2), {}), InputError);
}

TEST_CASE("line search failure returns the best iterate instead of throwing") {
    // f(x) = -x has no minimizer; expansion runs out and reports failure
    const optim::Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        g(0) = -1.0;
        return -x(0);
    };
    const auto result = optim::minimize(f, Eigen::VectorXd::Zero(1), {});
    CHECK(result.status == Status::LineSearchFail);
    CHECK(std::isfinite(result.value));
}

TEST_CASE("config validation") {
    OptimConfig bad;
    bad.c1 = 0.95;  // violates c1 < c2
    CHECK_THROWS_AS(optim::minimize(shifted_quadratic(Eigen::VectorXd::Zero(1)),
                                    Eigen::VectorXd::Zero(1), bad),
                    ConfigError);
    OptimConfig bad_tol;
    bad_tol.tolerance = 0.0;
    CHECK_THROWS_AS(optim::minimize(shifted_quadratic(Eigen::VectorXd::Zero(1)),
                                    Eigen::VectorXd::Zero(1), bad_tol),
                    ConfigError);
}

TEST_CASE("check_gradient is near-exact for linear and quadratic functions") {
    const optim::Objective linear = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(x.size());
        g.setConstant(3.0);
        return 3.0 * x.sum();
    };
    CHECK(optim::check_gradient(linear, Eigen::VectorXd::Ones(4)) <= 1e-10);

    Eigen::VectorXd a(3);
    a << 0.3, -0.7, 2.0;
    CHECK(optim::check_gradient(shifted_quadratic(a), Eigen::VectorXd::Zero(3), 1e-5) <= 1e-8);
}

TEST_CASE("BFGS and CG reach the same objective on a small CRF problem") {
    const Dataset data = testutil::random_dataset(3, 2, {6, 5}, 404);
    crf::CrfModel scratch = crf::zero_model(data.alphabet, data.dim, 0.1);
    const optim::Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        crf::unpack(v, scratch);
        auto [value, grad] = crf::nll_and_gradient(scratch, data);
        g = grad;
        return value;
    };
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(crf::packed_size(3, 2));

    OptimConfig cfg;
    cfg.tolerance = 1e-8;
    cfg.max_iterations = 2000;
    cfg.method = Method::Bfgs;
    const auto bfgs = optim::minimize(f, x0, cfg);
    cfg.method = Method::Cg;
    const auto cg = optim::minimize(f, x0, cfg);

    CHECK(bfgs.status == Status::Converged);
    CHECK(std::abs(bfgs.value - cg.value) < 1e-6);
}

TEST_CASE("large problems silently switch to L-BFGS") {
    const int d = 10001;
    const optim::Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * x;
        return x.squaredNorm();
    };
    // dense BFGS would need a 10001^2 inverse Hessian; this must stay cheap
    const auto result = optim::minimize(f, Eigen::VectorXd::Ones(d), {});
    CHECK(result.status == Status::Converged);
}
