#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace calikit {

// Default probability floor. Small enough to preserve reported probabilities
// to 12 decimals while keeping log-odds finite.
inline constexpr double kDefaultFloor = 1e-12;

// n x c matrix of row-simplex probability predictions. Construction goes
// through validate_and_floor, so every entry is strictly positive and every
// row sums to 1 within 1e-9.
class ProbabilityMatrix {
 public:
  // Validates `raw` (finite entries in [0,1], rows summing to 1 within 1e-6),
  // raises entries below `epsilon` to `epsilon` and renormalizes each row.
  // Throws std::invalid_argument on malformed input; the message carries the
  // offending row index.
  static ProbabilityMatrix validate_and_floor(const Eigen::MatrixXd& raw,
                                              double epsilon = kDefaultFloor,
                                              std::vector<std::string> category_names = {});

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double floor_epsilon() const { return epsilon_; }

  const std::vector<std::string>& category_names() const { return names_; }

 private:
  ProbabilityMatrix(Eigen::MatrixXd values, double epsilon, std::vector<std::string> names)
      : values_(std::move(values)), epsilon_(epsilon), names_(std::move(names)) {}

  Eigen::MatrixXd values_;
  double epsilon_;
  std::vector<std::string> names_;
};

// Observed class labels, stored as integer category indices in [0, c).
class LabelData {
 public:
  static LabelData from_indices(std::vector<int> labels, int num_categories,
                                std::vector<std::string> category_names = {});

  // Maps string labels to indices. When `category_names` is non-empty it is
  // authoritative and unknown labels are an error; otherwise categories are
  // assigned by first appearance.
  static LabelData from_strings(const std::vector<std::string>& labels,
                                std::vector<std::string> category_names = {});

  int size() const { return static_cast<int>(labels_.size()); }
  int num_categories() const { return num_categories_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& category_names() const { return names_; }

  // n x c 0/1 matrix with exactly one 1 per row.
  Eigen::MatrixXd one_hot() const;

  // Count of observations per category.
  std::vector<long> counts() const;

 private:
  LabelData(std::vector<int> labels, int num_categories, std::vector<std::string> names)
      : labels_(std::move(labels)), num_categories_(num_categories), names_(std::move(names)) {}

  std::vector<int> labels_;
  int num_categories_;
  std::vector<std::string> names_;
};

// Pre-softmax scores; no simplex constraint, entries must be finite.
class LogitMatrix {
 public:
  static LogitMatrix from(Eigen::MatrixXd values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  explicit LogitMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}
  Eigen::MatrixXd values_;
};

// Shift/scale parameters of the log-odds recalibration map. `delta` and
// `gamma` have one entry per non-baseline category, ordered by ascending
// category index with the baseline skipped.
struct MclloParams {
  Eigen::VectorXd delta;  // strictly positive, length c-1
  Eigen::VectorXd gamma;  // length c-1
  int baseline = 0;       // category index whose log-odds are fixed at 0

  static MclloParams identity(int num_categories, int baseline);

  int num_categories() const { return static_cast<int>(delta.size()) + 1; }
  Eigen::VectorXd tau() const { return delta.array().log(); }

  // Category index of the k-th parameter slot (skips the baseline).
  int category_of_slot(int k) const { return k < baseline ? k : k + 1; }

  // Throws std::invalid_argument if sizes disagree, delta is not strictly
  // positive, or baseline is out of range.
  void validate() const;
};

// Output of maximum-likelihood fitting. Standard errors pair with the
// parameters in (delta_1..delta_{c-1}, gamma_1..gamma_{c-1}) order and are
// NaN when the Hessian is singular.
struct FitResult {
  MclloParams params;
  Eigen::VectorXd std_errors;  // length 2(c-1)
  double loglik_mle = 0.0;
  double loglik_null = 0.0;
  Eigen::MatrixXd hessian;  // of the negative log-likelihood in (delta, gamma)
  bool converged = false;
  int iterations = 0;
  long n = 0;  // observations used in the fit
  std::vector<std::string> warnings;
};

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
  double mean_confidence = std::numeric_limits<double>::quiet_NaN();  // NaN when empty
  double accuracy = std::numeric_limits<double>::quiet_NaN();         // NaN when empty
};

// One Table-style report row: test result plus calibration metrics.
struct CalibrationReport {
  double lrt_stat = 0.0;
  int df = 0;
  double p_value = 1.0;
  double ece = 0.0;
  double mce = 0.0;
  int ece_bins = 0;
  double accuracy = 0.0;
  std::optional<double> label_change_rate;  // only when comparing two prediction sets
  std::vector<ReliabilityBin> reliability;
};

}  // namespace calikit
