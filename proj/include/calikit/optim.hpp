#pragma once

#include <Eigen/Core>
#include <functional>

namespace calikit {

// Objective callback: returns f(x) and fills grad (same size as x).
using GradObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
// Gradient-only callback, used for finite-difference Hessians.
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BfgsOptions {
  double grad_tol = 1e-8;  // infinity norm of the gradient
  int max_iterations = 500;
  // Optional box constraint; empty vectors mean unconstrained. Iterates are
  // projected onto the box, which contains separation pathologies where the
  // unconstrained optimum runs to infinity.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

// Minimizes a smooth objective with BFGS (inverse-Hessian update) and an
// Armijo backtracking line search. Intended for convex problems; on
// non-descent or failed line searches it falls back to steepest descent and
// ultimately returns the best point seen with converged=false.
BfgsResult minimize_bfgs(const GradObjective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options = {});

// Golden-section minimization of a unimodal function on [lo, hi]; stops when
// the bracket width drops below x_tol.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double x_tol);

// Symmetric Hessian estimate via central finite differences of an analytic
// gradient, with per-coordinate step rel_step * max(1, |x_k|).
Eigen::MatrixXd fd_hessian_from_grad(const GradFn& grad, const Eigen::VectorXd& x,
                                     double rel_step = 1e-5);

}  // namespace calikit
