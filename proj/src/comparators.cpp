#include "calikit/comparators.hpp"

#include <cmath>
#include <stdexcept>

#include "calikit/optim.hpp"

namespace calikit {

namespace {

void check_pair(const LogitMatrix& z, const LabelData& y) {
  if (y.size() != z.rows()) throw std::invalid_argument("logit/label row count mismatch");
  if (y.num_categories() != z.cols())
    throw std::invalid_argument("logit/label category count mismatch");
}

// Row-stable softmax of a score matrix.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::ArrayXXd a = scores.array();
  const Eigen::ArrayXd row_max = a.rowwise().maxCoeff();
  a = (a.colwise() - row_max).exp();
  const Eigen::ArrayXd denom = a.rowwise().sum();
  a.colwise() /= denom;
  return a.matrix();
}

// NLL and optional gradient blocks for softmax(z * diag(w) + b).
double scaled_softmax_nll(const Eigen::MatrixXd& z, const LabelData& y, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& b, Eigen::VectorXd* grad_w = nullptr,
                          Eigen::VectorXd* grad_b = nullptr) {
  const Eigen::Index n = z.rows();
  Eigen::ArrayXXd a =
      (z.array().rowwise() * w.transpose().array()).rowwise() + b.transpose().array();
  const Eigen::ArrayXd row_max = a.rowwise().maxCoeff();
  Eigen::ArrayXXd expa = (a.colwise() - row_max).exp();
  const Eigen::ArrayXd denom = expa.rowwise().sum();
  const Eigen::ArrayXd lse = row_max + denom.log();

  double nll = lse.sum();
  for (Eigen::Index i = 0; i < n; ++i) nll -= a(i, y.label(static_cast<int>(i)));

  if (grad_w != nullptr || grad_b != nullptr) {
    expa.colwise() /= denom;  // now the softmax probabilities
    for (Eigen::Index i = 0; i < n; ++i) expa(i, y.label(static_cast<int>(i))) -= 1.0;
    if (grad_b != nullptr) *grad_b = expa.colwise().sum().matrix().transpose();
    if (grad_w != nullptr)
      *grad_w = (expa * z.array()).colwise().sum().matrix().transpose();
  }
  return nll;
}

}  // namespace

double softmax_nll(const LogitMatrix& z, const LabelData& y, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& b) {
  check_pair(z, y);
  if (w.size() != z.cols() || b.size() != z.cols())
    throw std::invalid_argument("scaling parameter dimension mismatch");
  return scaled_softmax_nll(z.values(), y, w, b);
}

TemperatureModel fit_temperature(const LogitMatrix& z, const LabelData& y) {
  check_pair(z, y);
  if (z.rows() < 2) throw std::invalid_argument("temperature scaling needs n >= 2");
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(z.cols());
  const auto nll_at = [&](double t) {
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(z.cols(), 1.0 / t);
    return scaled_softmax_nll(z.values(), y, w, b);
  };
  TemperatureModel model;
  model.temperature = golden_section_minimize(nll_at, 1e-2, 1e2, 1e-6);
  model.nll = nll_at(model.temperature);
  return model;
}

ProbabilityMatrix apply_temperature(const LogitMatrix& z, double temperature,
                                    double floor_epsilon,
                                    std::vector<std::string> category_names) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  return ProbabilityMatrix::validate_and_floor(softmax_rows(z.values() / temperature),
                                               floor_epsilon, std::move(category_names));
}

VectorScalingModel fit_vector_scaling(const LogitMatrix& z, const LabelData& y) {
  check_pair(z, y);
  if (z.rows() < 2) throw std::invalid_argument("vector scaling needs n >= 2");
  const Eigen::Index c = z.cols();

  GradObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    Eigen::VectorXd grad_w, grad_b;
    const double nll =
        scaled_softmax_nll(z.values(), y, theta.head(c), theta.tail(c), &grad_w, &grad_b);
    grad.resize(2 * c);
    grad << grad_w, grad_b;
    return nll;
  };

  Eigen::VectorXd theta0(2 * c);
  theta0.head(c).setOnes();
  theta0.tail(c).setZero();
  const BfgsResult opt = minimize_bfgs(objective, theta0, BfgsOptions{});

  VectorScalingModel model;
  model.w = opt.x.head(c);
  model.b = opt.x.tail(c);
  model.b.array() -= model.b.mean();  // softmax shift gauge
  model.nll = opt.value;
  model.converged = opt.converged;
  model.iterations = opt.iterations;
  return model;
}

ProbabilityMatrix apply_vector_scaling(const LogitMatrix& z, const VectorScalingModel& model,
                                       double floor_epsilon,
                                       std::vector<std::string> category_names) {
  if (model.w.size() != z.cols() || model.b.size() != z.cols())
    throw std::invalid_argument("scaling parameter dimension mismatch");
  const Eigen::MatrixXd scores =
      ((z.values().array().rowwise() * model.w.transpose().array()).rowwise() +
       model.b.transpose().array())
          .matrix();
  return ProbabilityMatrix::validate_and_floor(softmax_rows(scores), floor_epsilon,
                                               std::move(category_names));
}

BinningModel fit_histogram_binning(const ProbabilityMatrix& x, const LabelData& y, int bins) {
  if (bins < 2) throw std::invalid_argument("histogram binning needs at least 2 bins");
  if (y.size() != x.rows()) throw std::invalid_argument("prediction/label row count mismatch");
  if (y.num_categories() != x.cols())
    throw std::invalid_argument("prediction/label category count mismatch");

  const Eigen::Index c = x.cols();
  BinningModel model;
  model.bins = bins;
  model.values.resize(c, bins);

  std::vector<long> count(static_cast<std::size_t>(bins));
  std::vector<long> hits(static_cast<std::size_t>(bins));
  for (Eigen::Index j = 0; j < c; ++j) {
    std::fill(count.begin(), count.end(), 0L);
    std::fill(hits.begin(), hits.end(), 0L);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      int b = static_cast<int>(std::ceil(x.values()(i, j) * bins)) - 1;
      b = std::min(std::max(b, 0), bins - 1);
      ++count[static_cast<std::size_t>(b)];
      if (y.label(static_cast<int>(i)) == j) ++hits[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      if (count[static_cast<std::size_t>(b)] > 0)
        model.values(j, b) = static_cast<double>(hits[static_cast<std::size_t>(b)]) /
                             static_cast<double>(count[static_cast<std::size_t>(b)]);
      else
        model.values(j, b) = (static_cast<double>(b) + 0.5) / bins;  // midpoint fallback
    }
  }
  return model;
}

ProbabilityMatrix apply_histogram_binning(const BinningModel& model, const ProbabilityMatrix& x) {
  if (model.values.rows() != x.cols())
    throw std::invalid_argument("binning model category count mismatch");
  const double eps = x.floor_epsilon();
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      int b = static_cast<int>(std::ceil(x.values()(i, j) * model.bins)) - 1;
      b = std::min(std::max(b, 0), model.bins - 1);
      const double v = std::max(model.values(j, b), eps);
      out(i, j) = v;
      sum += v;
    }
    out.row(i) /= sum;
  }
  return ProbabilityMatrix::validate_and_floor(out, eps, x.category_names());
}

}  // namespace calikit
