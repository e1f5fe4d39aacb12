#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace romfbk {

/// Returns f(x) and writes its gradient into grad (already sized like x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 500;
  /// Stop when the infinity norm of the gradient falls below this.
  double grad_tol = 1e-6;
  /// Stop when a step lowers f by less than f_rel_tol * max(|f|, 1). 0 disables.
  double f_rel_tol = 0.0;
  int max_line_search = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct AdamOptions {
  int max_iters = 5000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_tol = 0.0;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  /// The line search failed twice in a row (once after a steepest-descent
  /// restart); x is the best iterate found.
  bool line_search_failed = false;
  /// Objective value at x0 followed by the value after each accepted step.
  std::vector<double> history;
  std::string message;
};

/// Limited-memory BFGS with a strong-Wolfe line search.
OptimResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options = {});

/// Adam; returns the best iterate seen.
OptimResult minimize_adam(const Objective& objective, Eigen::VectorXd x0, const AdamOptions& options = {});

}  // namespace romfbk
