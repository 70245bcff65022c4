#include "calikit/inference.hpp"

#include <stdexcept>

#include "calikit/special_functions.hpp"

namespace calikit {

TestResult lrt_from_logliks(double loglik_null, double loglik_mle, int num_categories) {
  if (num_categories < 2) throw std::invalid_argument("need at least two categories");
  TestResult result;
  result.df = 2 * (num_categories - 1);
  double stat = 2.0 * (loglik_mle - loglik_null);
  if (stat < 0.0) {
    result.clamped = true;
    stat = 0.0;
  }
  result.statistic = stat;
  result.p_value = chi_sq_sf(stat, result.df);
  for (double alpha : {0.01, 0.05, 0.10}) result.reject_at[alpha] = result.p_value < alpha;
  return result;
}

TestResult lrt(const ProbabilityMatrix& x, const LabelData& y, const FitResult& fit) {
  if (fit.n != x.rows())
    throw std::invalid_argument("fit was produced from a different sample size");
  if (fit.params.num_categories() != x.cols() || y.num_categories() != x.cols())
    throw std::invalid_argument("fit was produced with a different category count");
  if (y.size() != x.rows()) throw std::invalid_argument("prediction/label row count mismatch");
  return lrt_from_logliks(fit.loglik_null, fit.loglik_mle, static_cast<int>(x.cols()));
}

}  // namespace calikit
