#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "calikit/rng.hpp"
#include "calikit/types.hpp"

namespace calikit {

// Monte Carlo design for one simulation cell. Predictions are drawn from a
// symmetric Dirichlet, the true event probabilities are the recalibration
// map of those predictions under (delta_1, 1, ..., 1; gamma = 1), and labels
// follow the true probabilities. At delta_1 = 1 the predictions are exactly
// calibrated by construction.
struct SimConfig {
  long n = 0;
  int c = 10;
  double delta_1 = 1.0;
  int reps = 1000;
  double alpha = 0.05;
  double dirichlet_alpha = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  ProbabilityMatrix x;
  LabelData y;
};

// One simulated dataset. The RNG stream is keyed by (seed, n, c,
// dirichlet_alpha, true params, rep), so any repetition can be regenerated
// independently of execution order.
Dataset generate_dataset(const SimConfig& config, std::uint64_t rep = 0);

// Generalized generator used by the studies: arbitrary true parameters.
Dataset generate_with_truth(long n, double dirichlet_alpha, const MclloParams& truth,
                            std::uint64_t seed, std::uint64_t rep);

struct StudyOptions {
  int c = 10;
  double dirichlet_alpha = 1.0;
  int reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

// Per-repetition outcome; estimates are in (delta, gamma) coordinates.
struct SimRepRecord {
  long n = 0;
  double delta_1 = 1.0;
  int rep = 0;
  bool converged = false;
  double lrt_stat = 0.0;
  double p_value = 1.0;
  double ece_x = 0.0;
  double ece_xstar = 0.0;
  Eigen::VectorXd delta_hat;
  Eigen::VectorXd gamma_hat;
};

struct CellSummary {
  long n = 0;
  double delta_1 = 1.0;
  int reps = 0;
  double rejection_rate = 0.0;
  double mean_stat = 0.0;
  double mean_ece_x = 0.0;
  double mean_ece_xstar = 0.0;
  double mean_ece_diff = 0.0;
  int non_converged = 0;
};

struct StudyResult {
  std::vector<SimRepRecord> records;  // cell-major, repetition-minor order
  std::vector<CellSummary> cells;
};

// Rejection rates of the likelihood ratio test over an (n, delta_1) grid.
// Non-converged fits are flagged but their p-values enter the tally.
StudyResult power_study(const std::vector<long>& ns, const std::vector<double>& deltas,
                        const StudyOptions& options);

// ECE of the raw and MCLLO-recalibrated predictions over the same grid
// (fit and recalibration on the same draw, square-root binning rule).
StudyResult ece_study(const std::vector<long>& ns, const std::vector<double>& deltas,
                      const StudyOptions& options);

struct ConsistencyRecord {
  long n = 0;
  int rep = 0;
  double error = 0.0;  // ||(delta_hat, gamma_hat) - truth||_2
  bool converged = false;
};

struct ConsistencyCell {
  long n = 0;
  double median_error = 0.0;
  double sqrt_n_scaled_error = 0.0;
  int non_converged = 0;
};

struct ConsistencyResult {
  std::vector<ConsistencyRecord> records;
  std::vector<ConsistencyCell> cells;
};

// Median parameter-estimation error against the generating truth across
// sample sizes.
ConsistencyResult consistency_study(const std::vector<long>& ns, const MclloParams& truth,
                                    const StudyOptions& options);

// Runs body(0..count-1) on up to `threads` workers. Work items must be
// independent; results should be written to preallocated slots so that
// aggregation order never depends on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace calikit
