#pragma once

#include <map>

#include "calikit/types.hpp"

namespace calikit {

// Likelihood ratio test of the calibration null (delta = gamma = 1) against
// the fitted recalibration map. Asymptotically Chi2 with 2(c-1) degrees of
// freedom.
struct TestResult {
  double statistic = 0.0;  // clamped at 0
  int df = 0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;  // alpha -> reject?
  bool clamped = false;              // statistic was negative from round-off
};

// Builds the test from a fit of the same data. Throws std::invalid_argument
// when the fit's provenance (n, c) does not match (x, y).
TestResult lrt(const ProbabilityMatrix& x, const LabelData& y, const FitResult& fit);

// Test from the two log-likelihoods directly; used when the fit is implicit.
TestResult lrt_from_logliks(double loglik_null, double loglik_mle, int num_categories);

}  // namespace calikit
