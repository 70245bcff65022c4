#pragma once

#include <Eigen/Core>

#include "calikit/types.hpp"

namespace calikit {

// n x (c-1) matrix of baseline-relative log odds, column k belonging to the
// k-th non-baseline category (ascending index order, baseline skipped):
//   L(i, k) = log(x_i,cat(k) / x_i,baseline).
// Finite for floored inputs.
Eigen::MatrixXd log_odds(const ProbabilityMatrix& x, int baseline);

// Shift-and-scale recalibration of baseline-category log odds. In stable
// form each row becomes softmax of (m_1, ..., m_{c-1}, 0) with the zero in
// the baseline slot and m_k = log(delta_k) + gamma_k * L(i, k). With
// delta = gamma = 1 the map is the identity.
ProbabilityMatrix mcllo_map(const ProbabilityMatrix& x, const MclloParams& params);

// Multinomial log-likelihood of the labels under the recalibrated
// probabilities, computed in log space (no exponentiation of large scores).
// Always <= 0.
double log_likelihood(const ProbabilityMatrix& x, const LabelData& y, const MclloParams& params);

enum class Parameterization {
  kTauGamma,    // (tau = log delta, gamma); the convex coordinates
  kDeltaGamma,  // (delta, gamma); the reporting coordinates
};

// Gradient of the log-likelihood, length 2(c-1), shift block first then
// scale block. In (tau, gamma):
//   d/d tau_k  = sum_i (y_ik - g_ik)
//   d/d gamma_k = sum_i (y_ik - g_ik) * L_ik
// In (delta, gamma) the shift block is divided by delta (chain rule).
Eigen::VectorXd grad_log_likelihood(const ProbabilityMatrix& x, const LabelData& y,
                                    const MclloParams& params,
                                    Parameterization parameterization = Parameterization::kTauGamma);

struct OptimizerOptions {
  double grad_tol = 1e-8;
  int max_iterations = 500;
  double tau_box = 30.0;    // |log delta| bound
  double gamma_box = 100.0;  // |gamma| bound
  bool compute_std_errors = true;
  double se_step_rel = 1e-5;  // central-difference step for the SE Hessian
};

// Maximum-likelihood fit over (tau, gamma) with BFGS and the analytic
// gradient, started at the identity (which is also the null point, so the
// null log-likelihood comes for free). Standard errors are taken from the
// inverse of the negative-log-likelihood Hessian in (delta, gamma)
// coordinates, estimated by central differences of the analytic gradient.
// Non-convergence is reported through the flag, never thrown.
FitResult fit_mle(const ProbabilityMatrix& x, const LabelData& y, int baseline,
                  const OptimizerOptions& options = {});

}  // namespace calikit
