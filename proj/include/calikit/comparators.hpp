#pragma once

#include <Eigen/Core>

#include "calikit/types.hpp"

namespace calikit {

// Multinomial negative log-likelihood of labels under softmax(z * diag(w) + b
// replicated per row). Pass w = 1, b = 0 for plain softmax.
double softmax_nll(const LogitMatrix& z, const LabelData& y, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& b);

struct TemperatureModel {
  double temperature = 1.0;
  double nll = 0.0;  // at the fitted temperature
};

// One-parameter scaling: minimizes the NLL of softmax(z / T) over
// T in [1e-2, 1e2] by golden section to |dT| < 1e-6.
TemperatureModel fit_temperature(const LogitMatrix& z, const LabelData& y);
ProbabilityMatrix apply_temperature(const LogitMatrix& z, double temperature,
                                    double floor_epsilon = kDefaultFloor,
                                    std::vector<std::string> category_names = {});

struct VectorScalingModel {
  Eigen::VectorXd w;  // length c
  Eigen::VectorXd b;  // length c, canonicalized to sum 0
  double nll = 0.0;
  bool converged = false;
  int iterations = 0;
};

// 2c-parameter diagonal scaling: minimizes the NLL of softmax(w .* z + b)
// with BFGS and the analytic gradient, initialized at w = 1, b = 0. The bias
// is reported with sum 0 (softmax is shift-invariant).
VectorScalingModel fit_vector_scaling(const LogitMatrix& z, const LabelData& y);
ProbabilityMatrix apply_vector_scaling(const LogitMatrix& z, const VectorScalingModel& model,
                                       double floor_epsilon = kDefaultFloor,
                                       std::vector<std::string> category_names = {});

// Per-class histogram recalibration on the probability scale: each class
// column is cut into equal-width bins and replaced by the empirical class
// frequency of its bin; empty bins fall back to the bin midpoint. Applying
// floors and renormalizes rows.
struct BinningModel {
  int bins = 0;
  Eigen::MatrixXd values;  // c x bins, fitted bin values per class
};

BinningModel fit_histogram_binning(const ProbabilityMatrix& x, const LabelData& y, int bins);
ProbabilityMatrix apply_histogram_binning(const BinningModel& model, const ProbabilityMatrix& x);

}  // namespace calikit
