#pragma once

#include <vector>

#include "calikit/types.hpp"

namespace calikit {

// Square-root binning rule: round(sqrt(n)), never fewer than 2 bins.
int sqrt_rule_bins(long n);

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
  long total = 0;
};

// Equal-width bins over (0, 1], first bin closed at 0. Confidence is the row
// maximum probability; the prediction is the argmax with ties broken toward
// the lowest category index.
ReliabilityBins reliability(const ProbabilityMatrix& x, const LabelData& y, int bins);

// Expected calibration error: sum over bins of (count/n) * |accuracy - mean
// confidence|; empty bins contribute nothing.
double ece(const ProbabilityMatrix& x, const LabelData& y, int bins);

// Maximum calibration error: the largest |accuracy - mean confidence| over
// nonempty bins.
double mce(const ProbabilityMatrix& x, const LabelData& y, int bins);

// Fraction of rows whose argmax prediction equals the observed label.
double accuracy(const ProbabilityMatrix& x, const LabelData& y);

// Fraction of rows whose argmax changed between the two prediction sets
// (same tie rule as accuracy).
double label_change_rate(const ProbabilityMatrix& before, const ProbabilityMatrix& after);

// Argmax with lowest-index tie-breaking; shared by all metrics.
int argmax_row(const Eigen::MatrixXd& values, Eigen::Index row);

}  // namespace calikit
