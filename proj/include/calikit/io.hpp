#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "calikit/comparators.hpp"
#include "calikit/simulation.hpp"
#include "calikit/types.hpp"

namespace calikit {

// Malformed files, schema mismatches, unreadable paths. The CLI maps this to
// its data-error exit code.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReadOptions {
  std::string format = "auto";  // auto (by extension) | csv | json
  // Probability columns: explicit list wins; otherwise every column whose
  // name starts with prob_prefix (category name = suffix); otherwise every
  // non-label column, named as-is.
  std::string prob_prefix = "p_";
  std::vector<std::string> prob_columns;
  std::string label_column = "label";
  bool require_labels = false;
  // When non-empty, fixes the category names; labels outside the list are an
  // error instead of being added by first appearance.
  std::vector<std::string> categories;
  double floor_epsilon = kDefaultFloor;
  std::string logit_prefix = "z_";
};

struct PredictionData {
  ProbabilityMatrix x;
  std::optional<LabelData> y;
};

// Reads a prediction file (CSV with header, or the JSON mirror), validates
// and floors the probabilities, and maps labels when a label column is
// present. Parse errors carry the 1-based line number.
PredictionData read_predictions(const std::string& path, const ReadOptions& options = {});

// Companion logits file: columns matching logit_prefix, else all non-label
// columns in file order.
LogitMatrix read_logits(const std::string& path, const ReadOptions& options = {});

// precision < 0 means full (shortest round-trip) formatting.
void write_predictions_csv(const std::string& path, const ProbabilityMatrix& x,
                           const LabelData* y = nullptr, int precision = 6);
void write_predictions_json(const std::string& path, const ProbabilityMatrix& x,
                            const LabelData* y = nullptr);

void write_reliability_csv(const std::string& path, const ReliabilityBins& bins);

void write_study_records_csv(const std::string& path, const StudyResult& result);
void write_study_cells_csv(const std::string& path, const StudyResult& result);
void write_consistency_records_csv(const std::string& path, const ConsistencyResult& result);
void write_consistency_cells_csv(const std::string& path, const ConsistencyResult& result);

// Persisted recalibration model; exactly one payload is set, matching
// `method`. Files round-trip losslessly (parse -> serialize is
// byte-identical).
struct SavedModel {
  std::string method;  // mcllo | temperature | vector | binning
  std::vector<std::string> categories;
  int baseline = -1;  // mcllo only
  std::optional<MclloParams> mcllo_params;
  Eigen::VectorXd mcllo_std_errors;  // empty when not applicable
  std::optional<double> temperature;
  std::optional<VectorScalingModel> vector_scaling;
  std::optional<BinningModel> binning;
  long n = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  std::string toolkit_version;
};

void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

// Applies a saved model; x is required for mcllo/binning, z for
// temperature/vector.
ProbabilityMatrix apply_model(const SavedModel& model, const ProbabilityMatrix* x,
                              const LogitMatrix* z, double floor_epsilon = kDefaultFloor);

// Shortest-round-trip or fixed-significant-digit double formatting shared by
// all writers.
std::string format_double(double v, int precision);

}  // namespace calikit
