#include "calikit/mcllo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "calikit/optim.hpp"

namespace calikit {

namespace {

void check_baseline(const ProbabilityMatrix& x, int baseline) {
  if (baseline < 0 || baseline >= x.cols())
    throw std::invalid_argument("baseline index out of range");
}

void check_pair(const ProbabilityMatrix& x, const LabelData& y) {
  if (y.size() != x.rows()) throw std::invalid_argument("prediction/label row count mismatch");
  if (y.num_categories() != x.cols())
    throw std::invalid_argument("prediction/label category count mismatch");
}

void check_params(const ProbabilityMatrix& x, const MclloParams& params) {
  params.validate();
  if (params.num_categories() != x.cols())
    throw std::invalid_argument("parameter dimension does not match category count");
}

// Shared evaluation state for likelihood and gradient computations on one
// (x, y) dataset: log odds are computed once, label bookkeeping once.
class LikelihoodEngine {
 public:
  LikelihoodEngine(const ProbabilityMatrix& x, const LabelData& y, int baseline)
      : l_(log_odds(x, baseline)), n_(x.rows()), k_(x.cols() - 1) {
    check_pair(x, y);
    slot_of_row_.resize(static_cast<std::size_t>(n_));
    slot_count_ = Eigen::VectorXd::Zero(k_);
    slot_l_sum_ = Eigen::VectorXd::Zero(k_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const int label = y.label(static_cast<int>(i));
      const int slot = label == baseline ? -1 : (label < baseline ? label : label - 1);
      slot_of_row_[static_cast<std::size_t>(i)] = slot;
      if (slot >= 0) {
        slot_count_[slot] += 1.0;
        slot_l_sum_[slot] += l_(i, slot);
      }
    }
  }

  // Log-likelihood and, when grad pointers are given, its (tau, gamma)
  // gradient blocks.
  double eval(const Eigen::VectorXd& tau, const Eigen::VectorXd& gamma,
              Eigen::VectorXd* grad_tau = nullptr, Eigen::VectorXd* grad_gamma = nullptr) const {
    // m_ik = tau_k + gamma_k * l_ik, with an implicit 0 in the baseline slot.
    Eigen::ArrayXXd m =
        (l_.array().rowwise() * gamma.transpose().array()).rowwise() + tau.transpose().array();
    const Eigen::ArrayXd row_max = m.rowwise().maxCoeff().max(0.0);
    Eigen::ArrayXXd expm = (m.colwise() - row_max).exp();
    const Eigen::ArrayXd denom = (-row_max).exp() + expm.rowwise().sum();
    const Eigen::ArrayXd lse = row_max + denom.log();

    double loglik = -lse.sum();
    for (Eigen::Index i = 0; i < n_; ++i) {
      const int slot = slot_of_row_[static_cast<std::size_t>(i)];
      if (slot >= 0) loglik += m(i, slot);
    }

    if (grad_tau != nullptr || grad_gamma != nullptr) {
      // g_ik = softmax weight of slot k; residual sums give the gradient.
      expm.colwise() /= denom;
      if (grad_tau != nullptr)
        *grad_tau = slot_count_ - expm.colwise().sum().matrix().transpose();
      if (grad_gamma != nullptr)
        *grad_gamma =
            slot_l_sum_ - (expm * l_.array()).colwise().sum().matrix().transpose();
    }
    return loglik;
  }

  Eigen::Index param_dim() const { return 2 * k_; }

 private:
  Eigen::MatrixXd l_;
  Eigen::Index n_;
  Eigen::Index k_;
  std::vector<int> slot_of_row_;  // -1 for baseline-labelled rows
  Eigen::VectorXd slot_count_;
  Eigen::VectorXd slot_l_sum_;
};

}  // namespace

Eigen::MatrixXd log_odds(const ProbabilityMatrix& x, int baseline) {
  check_baseline(x, baseline);
  const Eigen::Index n = x.rows();
  const Eigen::Index c = x.cols();
  Eigen::MatrixXd l(n, c - 1);
  const auto& v = x.values();
  for (Eigen::Index k = 0; k < c - 1; ++k) {
    const Eigen::Index cat = k < baseline ? k : k + 1;
    l.col(k) = (v.col(cat).array() / v.col(baseline).array()).log();
  }
  return l;
}

ProbabilityMatrix mcllo_map(const ProbabilityMatrix& x, const MclloParams& params) {
  check_params(x, params);
  const Eigen::Index n = x.rows();
  const Eigen::Index c = x.cols();
  const Eigen::MatrixXd l = log_odds(x, params.baseline);
  const Eigen::VectorXd tau = params.tau();

  Eigen::ArrayXXd m = (l.array().rowwise() * params.gamma.transpose().array()).rowwise() +
                      tau.transpose().array();
  const Eigen::ArrayXd row_max = m.rowwise().maxCoeff().max(0.0);
  Eigen::ArrayXXd expm = (m.colwise() - row_max).exp();
  const Eigen::ArrayXd base = (-row_max).exp();
  const Eigen::ArrayXd denom = base + expm.rowwise().sum();

  Eigen::MatrixXd g(n, c);
  g.col(params.baseline) = (base / denom).matrix();
  for (Eigen::Index k = 0; k < c - 1; ++k) {
    const Eigen::Index cat = k < params.baseline ? k : k + 1;
    g.col(cat) = (expm.col(k) / denom).matrix();
  }
  return ProbabilityMatrix::validate_and_floor(g, x.floor_epsilon(), x.category_names());
}

double log_likelihood(const ProbabilityMatrix& x, const LabelData& y, const MclloParams& params) {
  check_params(x, params);
  LikelihoodEngine engine(x, y, params.baseline);
  return engine.eval(params.tau(), params.gamma);
}

Eigen::VectorXd grad_log_likelihood(const ProbabilityMatrix& x, const LabelData& y,
                                    const MclloParams& params,
                                    Parameterization parameterization) {
  check_params(x, params);
  LikelihoodEngine engine(x, y, params.baseline);
  Eigen::VectorXd grad_tau, grad_gamma;
  engine.eval(params.tau(), params.gamma, &grad_tau, &grad_gamma);
  if (parameterization == Parameterization::kDeltaGamma)
    grad_tau.array() /= params.delta.array();
  Eigen::VectorXd out(2 * grad_tau.size());
  out << grad_tau, grad_gamma;
  return out;
}

FitResult fit_mle(const ProbabilityMatrix& x, const LabelData& y, int baseline,
                  const OptimizerOptions& options) {
  check_baseline(x, baseline);
  check_pair(x, y);
  const Eigen::Index k = x.cols() - 1;

  FitResult result;
  result.n = x.rows();
  if (x.rows() < 10 * k)
    result.warnings.push_back("sample size n=" + std::to_string(x.rows()) +
                              " is small for 2(c-1)=" + std::to_string(2 * k) + " parameters");
  const auto counts = y.counts();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0)
      result.warnings.push_back("category '" + y.category_names()[j] +
                                "' is absent from the labels");
  }

  LikelihoodEngine engine(x, y, baseline);

  const auto split = [k](const Eigen::VectorXd& theta) {
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(theta.head(k), theta.tail(k));
  };

  GradObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const auto [tau, gamma] = split(theta);
    Eigen::VectorXd grad_tau, grad_gamma;
    const double ll = engine.eval(tau, gamma, &grad_tau, &grad_gamma);
    grad.resize(2 * k);
    grad << -grad_tau, -grad_gamma;
    return -ll;
  };

  Eigen::VectorXd theta0(2 * k);
  theta0.head(k).setZero();
  theta0.tail(k).setOnes();
  result.loglik_null = engine.eval(theta0.head(k), theta0.tail(k));

  BfgsOptions bfgs;
  bfgs.grad_tol = options.grad_tol;
  bfgs.max_iterations = options.max_iterations;
  bfgs.lower.resize(2 * k);
  bfgs.upper.resize(2 * k);
  bfgs.lower.head(k).setConstant(-options.tau_box);
  bfgs.upper.head(k).setConstant(options.tau_box);
  bfgs.lower.tail(k).setConstant(-options.gamma_box);
  bfgs.upper.tail(k).setConstant(options.gamma_box);

  const BfgsResult opt = minimize_bfgs(objective, theta0, bfgs);
  const auto [tau_hat, gamma_hat] = split(opt.x);

  result.params.delta = tau_hat.array().exp().matrix();
  result.params.gamma = gamma_hat;
  result.params.baseline = baseline;
  result.loglik_mle = -opt.value;
  result.converged = opt.converged;
  result.iterations = opt.iterations;
  if (!opt.converged)
    result.warnings.push_back("optimizer stopped after " + std::to_string(opt.iterations) +
                              " iterations without meeting the gradient tolerance");

  result.std_errors = Eigen::VectorXd::Constant(2 * k, std::numeric_limits<double>::quiet_NaN());
  result.hessian.resize(0, 0);
  if (options.compute_std_errors) {
    // Hessian of the negative log-likelihood in the reporting (delta, gamma)
    // coordinates, by central differences of the analytic gradient.
    GradFn neg_grad_dg = [&](const Eigen::VectorXd& theta_dg) {
      const auto [delta, gamma] = split(theta_dg);
      Eigen::VectorXd grad_tau, grad_gamma;
      engine.eval(delta.array().log().matrix(), gamma, &grad_tau, &grad_gamma);
      Eigen::VectorXd g(2 * k);
      g << -(grad_tau.array() / delta.array()).matrix(), -grad_gamma;
      return g;
    };
    Eigen::VectorXd theta_dg(2 * k);
    theta_dg << result.params.delta, result.params.gamma;

    // Keep delta strictly positive when stepping.
    bool steps_ok = true;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (theta_dg[j] <= 2.0 * options.se_step_rel * std::max(1.0, theta_dg[j])) steps_ok = false;
    }
    if (steps_ok) {
      result.hessian = fd_hessian_from_grad(neg_grad_dg, theta_dg, options.se_step_rel);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(result.hessian);
      if (lu.isInvertible()) {
        const Eigen::MatrixXd cov = lu.inverse();
        bool any_bad = false;
        for (Eigen::Index j = 0; j < 2 * k; ++j) {
          const double v = cov(j, j);
          if (v > 0.0)
            result.std_errors[j] = std::sqrt(v);
          else
            any_bad = true;
        }
        if (any_bad)
          result.warnings.push_back(
              "inverse Hessian has non-positive diagonal entries; affected standard errors "
              "flagged NaN");
      } else {
        result.warnings.push_back("Hessian is singular; standard errors flagged NaN");
      }
    } else {
      result.warnings.push_back(
          "delta estimate too close to zero for finite-difference standard errors; flagged NaN");
    }
  }
  return result;
}

}  // namespace calikit
