#include "calikit/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace calikit {

namespace {

void project_box(Eigen::VectorXd& x, const BfgsOptions& opts) {
  if (opts.lower.size() > 0) x = x.cwiseMax(opts.lower);
  if (opts.upper.size() > 0) x = x.cwiseMin(opts.upper);
}

}  // namespace

BfgsResult minimize_bfgs(const GradObjective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options) {
  const Eigen::Index dim = x0.size();
  if (options.lower.size() > 0 && options.lower.size() != dim)
    throw std::invalid_argument("box lower bound dimension mismatch");
  if (options.upper.size() > 0 && options.upper.size() != dim)
    throw std::invalid_argument("box upper bound dimension mismatch");

  BfgsResult res;
  project_box(x0, options);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g(dim);
  double f = objective(x, g);
  res.evaluations = 1;

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
  bool first_update = true;

  Eigen::VectorXd x_new(dim), g_new(dim);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    res.iterations = iter;
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd direction = -(h_inv * g);
    double dir_deriv = g.dot(direction);
    if (!(dir_deriv < 0.0)) {
      // Curvature information went bad; restart from steepest descent.
      h_inv.setIdentity();
      first_update = true;
      direction = -g;
      dir_deriv = g.dot(direction);
    }

    // Armijo backtracking from the natural BFGS step.
    constexpr double kArmijo = 1e-4;
    constexpr double kShrink = 0.5;
    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * direction;
      project_box(x_new, options);
      f_new = objective(x_new, g_new);
      ++res.evaluations;
      // Against the projected displacement, not the raw step.
      const double decrease = g.dot(x_new - x);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * decrease) {
        accepted = true;
        break;
      }
      step *= kShrink;
      if (step * direction.lpNorm<Eigen::Infinity>() < 1e-16) break;
    }
    if (!accepted) {
      res.iterations = iter;
      break;  // no further progress possible at working precision
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {
        h_inv *= sy / y.squaredNorm();
        first_update = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
      const Eigen::MatrixXd v = identity - rho * s * y.transpose();
      h_inv = v * h_inv * v.transpose() + rho * s * s.transpose();
    }
    x = x_new;
    g = g_new;
    f = f_new;
  }

  if (!res.converged && g.lpNorm<Eigen::Infinity>() <= options.grad_tol) res.converged = true;
  res.x = x;
  res.value = f;
  res.grad = g;
  return res;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double x_tol) {
  if (!(lo < hi)) throw std::invalid_argument("golden section needs lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

Eigen::MatrixXd fd_hessian_from_grad(const GradFn& grad, const Eigen::VectorXd& x,
                                     double rel_step) {
  const Eigen::Index dim = x.size();
  Eigen::MatrixXd hess(dim, dim);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double h = rel_step * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    hess.col(k) = (grad(xp) - grad(xm)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace calikit
