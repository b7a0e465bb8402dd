#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace seqlab::optim {

enum class Method { Bfgs, Lbfgs, Cg };
enum class Status { Converged, MaxIter, LineSearchFail };

struct OptimConfig {
    Method method = Method::Bfgs;
    double tolerance = 1e-5;  // stop when the gradient 2-norm falls below this
    int max_iterations = 500;
    double c1 = 1e-4;  // sufficient-decrease constant
    double c2 = 0.9;   // curvature constant, c1 < c2 < 1
    int memory = 10;   // L-BFGS history length
    bool record_history = true;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    Status status = Status::MaxIter;
    std::vector<double> history;  // objective at x0 and at each accepted iterate
};

/// Objective callable: returns f(x) and fills grad with the gradient.
/// Returning a non-finite value makes the line search reject the trial step.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Smooth unconstrained minimization with a strong Wolfe line search.
/// The dense-BFGS inverse Hessian update is skipped whenever the curvature
/// condition s'y > 0 fails; problems with more than 10^4 parameters are
/// switched to L-BFGS automatically. A failed line search ends the run with
/// the best iterate found (Status::LineSearchFail), not an exception.
OptimResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimConfig& config = {});

/// Max relative error between the analytic gradient and central finite
/// differences: max_i |g_i - fd_i| / max(1, |g_i|).
double check_gradient(const Objective& f, const Eigen::VectorXd& x, double eps = 1e-5);

const char* status_name(Status s);
const char* method_name(Method m);
Method method_from_name(const std::string& name);

}  // namespace seqlab::optim
