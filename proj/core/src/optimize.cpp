#include "seqlab/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "seqlab/error.hpp"

namespace seqlab::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
    double alpha = 0.0;
    double f = kInf;
    double df = 0.0;  // directional derivative gable
    Eigen::VectorXd x;
    Eigen::VectorXd g;
};

struct LineSearch {
    bool ok = false;
    Point accepted;
};

/// Strong Wolfe line search: bracketing with doubling steps, then bounded
/// bisection (the "zoom" refinement). Non-finite trial values are treated as
/// an upper bracket endpoint so the search backs off into the finite region.
LineSearch wolfe_line_search(const Objective& f, const Point& current, const Eigen::VectorXd& dir,
                             double c1, double c2) {
    Point origin = current;
    origin.alpha = 0.0;  // step lengths are measured from the current iterate
    const double f0 = origin.f;
    const double dphi0 = origin.g.dot(dir);

    auto eval = [&](double alpha) {
        Point p;
        p.alpha = alpha;
        p.x = origin.x + alpha * dir;
        p.g.resize(origin.x.size());
        p.f = f(p.x, p.g);
        p.df = std::isfinite(p.f) ? p.g.dot(dir) : 0.0;
        return p;
    };

    Point lo = origin;
    Point hi;
    bool bracketed = false;

    Point prev = origin;
    double alpha = 1.0;
    const int max_expand = 30;
    for (int i = 0; i < max_expand; ++i) {
        Point p = eval(alpha);
        if (!std::isfinite(p.f) || p.f > f0 + c1 * alpha * dphi0 || (i > 0 && p.f >= prev.f)) {
            lo = prev;
            hi = std::move(p);
            bracketed = true;
            break;
        }
        if (std::abs(p.df) <= -c2 * dphi0) {
            return {true, std::move(p)};
        }
        if (p.df >= 0.0) {
            hi = prev;
            lo = std::move(p);
            bracketed = true;
            break;
        }
        prev = std::move(p);
        alpha *= 2.0;
    }
    if (!bracketed) return {};

    const int max_zoom = 50;
    for (int i = 0; i < max_zoom; ++i) {
        const double mid = 0.5 * (lo.alpha + hi.alpha);
        Point p = eval(mid);
        if (!std::isfinite(p.f) || p.f > f0 + c1 * mid * dphi0 || p.f >= lo.f) {
            hi = std::move(p);
        } else {
            if (std::abs(p.df) <= -c2 * dphi0) {
                return {true, std::move(p)};
            }
            if (p.df * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = std::move(p);
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    // Interval collapsed without meeting the curvature condition. Accept the
    // sufficient-decrease point if it made progress, otherwise fail.
    if (lo.alpha > 0.0 && std::isfinite(lo.f) && lo.f < f0) {
        return {true, std::move(lo)};
    }
    return {};
}

}  // namespace

OptimResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimConfig& config) {
    if (!(config.c1 > 0.0 && config.c1 < config.c2 && config.c2 < 1.0)) {
        throw ConfigError("line-search constants must satisfy 0 < c1 < c2 < 1");
    }
    if (config.tolerance <= 0.0) throw ConfigError("gradient tolerance must be positive");

    const auto n = x0.size();
    Method method = config.method;
    if (method == Method::Bfgs && n > 10000) method = Method::Lbfgs;

    Point cur;
    cur.x = x0;
    cur.g.resize(n);
    cur.f = f(cur.x, cur.g);
    if (!std::isfinite(cur.f) || !cur.g.allFinite()) {
        throw InputError("objective is not finite at the starting point");
    }

    OptimResult result;
    result.status = Status::MaxIter;
    if (config.record_history) result.history.push_back(cur.f);

    Eigen::MatrixXd h_inv;
    if (method == Method::Bfgs) h_inv = Eigen::MatrixXd::Identity(n, n);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> lbfgs_pairs;  // (s, y)
    Eigen::VectorXd prev_grad;
    Eigen::VectorXd prev_dir;
    bool first_quasi_newton_update = true;

    int iter = 0;
    for (; iter < config.max_iterations; ++iter) {
        if (cur.g.norm() <= config.tolerance) {
            result.status = Status::Converged;
            break;
        }

        Eigen::VectorXd dir;
        switch (method) {
            case Method::Bfgs:
                dir = -(h_inv * cur.g);
                break;
            case Method::Lbfgs: {
                // two-loop recursion
                dir = -cur.g;
                std::vector<double> rho, a;
                rho.reserve(lbfgs_pairs.size());
                a.resize(lbfgs_pairs.size());
                for (const auto& [s, y] : lbfgs_pairs) rho.push_back(1.0 / y.dot(s));
                for (int i = static_cast<int>(lbfgs_pairs.size()) - 1; i >= 0; --i) {
                    const auto& [s, y] = lbfgs_pairs[static_cast<std::size_t>(i)];
                    a[static_cast<std::size_t>(i)] = rho[static_cast<std::size_t>(i)] * s.dot(dir);
                    dir -= a[static_cast<std::size_t>(i)] * y;
                }
                if (!lbfgs_pairs.empty()) {
                    const auto& [s, y] = lbfgs_pairs.back();
                    dir *= s.dot(y) / y.squaredNorm();
                }
                for (std::size_t i = 0; i < lbfgs_pairs.size(); ++i) {
                    const auto& [s, y] = lbfgs_pairs[i];
                    const double b = rho[i] * y.dot(dir);
                    dir += (a[i] - b) * s;
                }
                break;
            }
            case Method::Cg: {
                if (prev_grad.size() == 0) {
                    dir = -cur.g;
                } else {
                    // Polak-Ribiere+ with restart on non-descent directions
                    const double beta = std::max(
                        0.0, cur.g.dot(cur.g - prev_grad) / prev_grad.squaredNorm());
                    dir = -cur.g + beta * prev_dir;
                }
                break;
            }
        }

        double dphi0 = cur.g.dot(dir);
        if (!(dphi0 < 0.0)) {
            dir = -cur.g;
            dphi0 = cur.g.dot(dir);
            if (!(dphi0 < 0.0)) {
                result.status = Status::Converged;
                break;
            }
        }

        const LineSearch ls = wolfe_line_search(f, cur, dir, config.c1, config.c2);
        if (!ls.ok) {
            result.status = Status::LineSearchFail;
            break;
        }

        const Eigen::VectorXd step = ls.accepted.x - cur.x;
        const Eigen::VectorXd grad_change = ls.accepted.g - cur.g;
        const double sy = step.dot(grad_change);

        prev_grad = cur.g;
        prev_dir = dir;
        cur = ls.accepted;
        if (config.record_history) result.history.push_back(cur.f);

        if (sy > 1e-10 * step.norm() * grad_change.norm()) {
            if (method == Method::Bfgs) {
                if (first_quasi_newton_update) {
                    h_inv *= sy / grad_change.squaredNorm();
                    first_quasi_newton_update = false;
                }
                const double rho = 1.0 / sy;
                const Eigen::VectorXd hy = h_inv * grad_change;
                h_inv -= rho * (step * hy.transpose() + hy * step.transpose());
                h_inv += rho * (1.0 + rho * grad_change.dot(hy)) * (step * step.transpose());
            } else if (method == Method::Lbfgs) {
                lbfgs_pairs.emplace_back(step, grad_change);
                if (static_cast<int>(lbfgs_pairs.size()) > config.memory) lbfgs_pairs.pop_front();
            }
        }
        // curvature failure: skip the update, keep the previous approximation
    }

    if (iter == config.max_iterations && cur.g.norm() <= config.tolerance) {
        result.status = Status::Converged;
    }
    result.x = cur.x;
    result.value = cur.f;
    result.gradient_norm = cur.g.norm();
    result.iterations = iter;
    return result;
}

double check_gradient(const Objective& f, const Eigen::VectorXd& x, double eps) {
    Eigen::VectorXd g(x.size());
    const double fx = f(x, g);
    if (!std::isfinite(fx) || !g.allFinite()) {
        throw NumericError("objective not finite at the probe point");
    }
    Eigen::VectorXd scratch(x.size());
    Eigen::VectorXd probe = x;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + eps;
        const double fp = f(probe, scratch);
        probe(i) = x(i) - eps;
        const double fm = f(probe, scratch);
        probe(i) = x(i);
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("objective not finite at a finite-difference probe");
        }
        const double fd = (fp - fm) / (2.0 * eps);
        const double rel = std::abs(g(i) - fd) / std::max(1.0, std::abs(g(i)));
        worst = std::max(worst, rel);
    }
    return worst;
}

const char* status_name(Status s) {
    switch (s) {
        case Status::Converged: return "converged";
        case Status::MaxIter: return "max-iterations";
        case Status::LineSearchFail: return "line-search-fail";
    }
    return "unknown";
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Bfgs: return "bfgs";
        case Method::Lbfgs: return "lbfgs";
        case Method::Cg: return "cg";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "bfgs") return Method::Bfgs;
    if (name == "lbfgs" || name == "l-bfgs") return Method::Lbfgs;
    if (name == "cg") return Method::Cg;
    throw ConfigError("unknown optimizer '" + name + "' (expected bfgs, lbfgs or cg)");
}

}  // namespace seqlab::optim
