#pragma once

#include <functional>
#include <string>
#include <Eigen/Dense>

namespace fnmcop {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  int max_iter = 500;
  double gtol = 1e-5;        // on the Euclidean gradient norm
  double ftol = 1e-10;       // relative objective change
  double max_step = 2.0;     // cap on the step length in parameter space
  double fd_step = 1e-6;     // relative central-difference step for gradients
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // gradient criterion met
  std::string message;
};

/// Central differences with step h_i = step * max(1, |x_i|).
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step = 1e-6);
/// Central second differences with step h_i = step * max(1, |x_i|); symmetric.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double step = 1e-4);

/// BFGS minimization with a backtracking Armijo line search. Non-finite
/// objective values are treated as +infinity, so the search backtracks out
/// of invalid regions. The objective never increases across accepted steps.
OptimResult bfgs_minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& options = {});

}  // namespace fnmcop
