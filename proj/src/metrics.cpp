#include "calikit/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace calikit {

namespace {

// Bin index for a confidence in [0, 1]: bins are (k/B, (k+1)/B] with the
// first bin closed at 0.
int bin_index(double confidence, int bins) {
  if (confidence <= 0.0) return 0;
  const int idx = static_cast<int>(std::ceil(confidence * bins)) - 1;
  return std::min(std::max(idx, 0), bins - 1);
}

}  // namespace

int sqrt_rule_bins(long n) {
  const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return std::max(b, 2);
}

int argmax_row(const Eigen::MatrixXd& values, Eigen::Index row) {
  int best = 0;
  double best_value = values(row, 0);
  for (Eigen::Index j = 1; j < values.cols(); ++j) {
    if (values(row, j) > best_value) {
      best_value = values(row, j);
      best = static_cast<int>(j);
    }
  }
  return best;
}

ReliabilityBins reliability(const ProbabilityMatrix& x, const LabelData& y, int bins) {
  if (bins < 1) throw std::invalid_argument("bin count must be >= 1");
  if (y.size() != x.rows()) throw std::invalid_argument("prediction/label row count mismatch");

  std::vector<long> count(static_cast<std::size_t>(bins), 0);
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<long> correct(static_cast<std::size_t>(bins), 0);
  const auto& v = x.values();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int pred = argmax_row(v, i);
    const double conf = v(i, pred);
    const auto b = static_cast<std::size_t>(bin_index(conf, bins));
    ++count[b];
    conf_sum[b] += conf;
    if (pred == y.label(static_cast<int>(i))) ++correct[b];
  }

  ReliabilityBins out;
  out.total = x.rows();
  out.bins.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    auto& bin = out.bins[static_cast<std::size_t>(b)];
    bin.lo = static_cast<double>(b) / bins;
    bin.hi = static_cast<double>(b + 1) / bins;
    bin.count = count[static_cast<std::size_t>(b)];
    if (bin.count > 0) {
      bin.mean_confidence = conf_sum[static_cast<std::size_t>(b)] / static_cast<double>(bin.count);
      bin.accuracy =
          static_cast<double>(correct[static_cast<std::size_t>(b)]) / static_cast<double>(bin.count);
    }
  }
  return out;
}

double ece(const ProbabilityMatrix& x, const LabelData& y, int bins) {
  const ReliabilityBins rel = reliability(x, y, bins);
  double total = 0.0;
  for (const auto& bin : rel.bins) {
    if (bin.count == 0) continue;
    total += static_cast<double>(bin.count) / static_cast<double>(rel.total) *
             std::abs(bin.accuracy - bin.mean_confidence);
  }
  return total;
}

double mce(const ProbabilityMatrix& x, const LabelData& y, int bins) {
  const ReliabilityBins rel = reliability(x, y, bins);
  double worst = 0.0;
  for (const auto& bin : rel.bins) {
    if (bin.count == 0) continue;
    worst = std::max(worst, std::abs(bin.accuracy - bin.mean_confidence));
  }
  return worst;
}

double accuracy(const ProbabilityMatrix& x, const LabelData& y) {
  if (y.size() != x.rows()) throw std::invalid_argument("prediction/label row count mismatch");
  long correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (argmax_row(x.values(), i) == y.label(static_cast<int>(i))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

double label_change_rate(const ProbabilityMatrix& before, const ProbabilityMatrix& after) {
  if (before.rows() != after.rows() || before.cols() != after.cols())
    throw std::invalid_argument("prediction sets have mismatched dimensions");
  long changed = 0;
  for (Eigen::Index i = 0; i < before.rows(); ++i) {
    if (argmax_row(before.values(), i) != argmax_row(after.values(), i)) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(before.rows());
}

}  // namespace calikit
