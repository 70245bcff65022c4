#include "calikit/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "calikit/comparators.hpp"
#include "calikit/inference.hpp"
#include "calikit/io.hpp"
#include "calikit/mcllo.hpp"
#include "calikit/metrics.hpp"
#include "calikit/simulation.hpp"
#include "calikit/version.hpp"

namespace calikit {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Common input options shared by the data-reading subcommands.
struct InputFlags {
  std::string prob_prefix = "p_";
  std::string label_column = "label";
  std::vector<std::string> prob_columns;
  std::vector<std::string> categories;
  std::string format = "auto";
  double epsilon = kDefaultFloor;

  void attach(CLI::App* cmd) {
    cmd->add_option("--prob-prefix", prob_prefix,
                    "Header prefix identifying probability columns (default p_)");
    cmd->add_option("--prob-cols", prob_columns, "Explicit probability column names")
        ->delimiter(',');
    cmd->add_option("--label-col", label_column, "Label column name (default label)");
    cmd->add_option("--categories", categories, "Fixed category names")->delimiter(',');
    cmd->add_option("--format", format, "Input format: auto|csv|json")
        ->check(CLI::IsMember({"auto", "csv", "json"}));
    cmd->add_option("--epsilon", epsilon, "Probability floor (default 1e-12)")
        ->check(CLI::PositiveNumber);
  }

  ReadOptions to_read_options(bool require_labels = false) const {
    ReadOptions opts;
    opts.prob_prefix = prob_prefix;
    opts.prob_columns = prob_columns;
    opts.label_column = label_column;
    opts.categories = categories;
    opts.format = format;
    opts.floor_epsilon = epsilon;
    opts.require_labels = require_labels;
    return opts;
  }
};

int resolve_baseline(const std::string& spec, const std::vector<std::string>& categories) {
  if (spec == "last") return static_cast<int>(categories.size()) - 1;
  const auto it = std::find(categories.begin(), categories.end(), spec);
  if (it == categories.end())
    throw DataError("baseline category '" + spec + "' not found among categories");
  return static_cast<int>(it - categories.begin());
}

int parse_bins(const std::string& spec, long n) {
  if (spec == "sqrt") return sqrt_rule_bins(n);
  int value = 0;
  try {
    value = std::stoi(spec);
  } catch (const std::exception&) {
    throw DataError("--bins expects 'sqrt' or a positive integer, got '" + spec + "'");
  }
  if (value < 1) throw DataError("--bins must be >= 1");
  return value;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void print_fit_table(const FitResult& fit, const std::vector<std::string>& categories) {
  const int k = static_cast<int>(fit.params.delta.size());
  std::cout << "Parameter estimates (baseline: "
            << categories[static_cast<std::size_t>(fit.params.baseline)] << ")\n";
  std::cout << "  category              delta (SE)            gamma (SE)\n";
  for (int j = 0; j < k; ++j) {
    const int cat = fit.params.category_of_slot(j);
    char line[160];
    const double se_d = fit.std_errors.size() > 0 ? fit.std_errors[j] : std::nan("");
    const double se_g = fit.std_errors.size() > 0 ? fit.std_errors[k + j] : std::nan("");
    std::snprintf(line, sizeof(line), "  %-18s %8.3f (%s)      %8.3f (%s)",
                  categories[static_cast<std::size_t>(cat)].c_str(), fit.params.delta[j],
                  std::isnan(se_d) ? "NA" : format_double(se_d, 3).c_str(), fit.params.gamma[j],
                  std::isnan(se_g) ? "NA" : format_double(se_g, 3).c_str());
    std::cout << line << "\n";
  }
  std::cout << "  log-likelihood at MLE  = " << format_double(fit.loglik_mle, 9) << "\n";
  std::cout << "  log-likelihood at null = " << format_double(fit.loglik_null, 9) << "\n";
  std::cout << "  converged = " << (fit.converged ? "yes" : "no")
            << " (iterations: " << fit.iterations << ", n: " << fit.n << ")\n";
}

void print_test_result(const TestResult& test) {
  std::cout << "LRT statistic = " << format_double(test.statistic, 6) << " on " << test.df
            << " degrees of freedom, p = " << format_double(test.p_value, 6) << "\n";
  for (const auto& [alpha, reject] : test.reject_at)
    std::cout << "  alpha=" << format_double(alpha, 3) << ": "
              << (reject ? "reject calibration" : "no evidence against calibration") << "\n";
  if (test.clamped) std::cout << "  (statistic clamped at 0 from optimizer round-off)\n";
}

// ---------------------------------------------------------------- fit ----

int run_fit(const std::string& in_path, const std::string& out_path, const std::string& method,
            const std::string& baseline_spec, const std::string& bins_spec,
            const std::string& logits_path, const InputFlags& input, bool strict) {
  const PredictionData data = read_predictions(in_path, input.to_read_options(true));
  const ProbabilityMatrix& x = data.x;
  const LabelData& y = *data.y;

  SavedModel model;
  model.method = method;
  model.categories = x.category_names();
  model.n = x.rows();
  model.toolkit_version = kVersion;

  if (method == "mcllo") {
    const int baseline = resolve_baseline(baseline_spec, x.category_names());
    const FitResult fit = fit_mle(x, y, baseline);
    print_warnings(fit.warnings);
    print_fit_table(fit, x.category_names());
    if (!fit.converged && strict) throw NumericalFailure("mcllo fit did not converge");
    model.baseline = baseline;
    model.mcllo_params = fit.params;
    model.mcllo_std_errors = fit.std_errors;
    model.loglik = fit.loglik_mle;
    model.converged = fit.converged;
  } else if (method == "temperature" || method == "vector") {
    if (logits_path.empty())
      throw DataError(method + " scaling needs --logits (pre-softmax scores are required)");
    const LogitMatrix z = read_logits(logits_path, input.to_read_options());
    if (z.rows() != x.rows() || z.cols() != x.cols())
      throw DataError("logits file dimensions do not match predictions");
    if (method == "temperature") {
      const TemperatureModel tm = fit_temperature(z, y);
      std::cout << "temperature T = " << format_double(tm.temperature, 6)
                << " (NLL " << format_double(tm.nll, 9) << ")\n";
      model.temperature = tm.temperature;
      model.loglik = -tm.nll;
    } else {
      const VectorScalingModel vs = fit_vector_scaling(z, y);
      if (!vs.converged && strict) throw NumericalFailure("vector scaling did not converge");
      std::cout << "vector scaling fitted (NLL " << format_double(vs.nll, 9)
                << ", converged: " << (vs.converged ? "yes" : "no") << ")\n";
      model.vector_scaling = vs;
      model.loglik = -vs.nll;
      model.converged = vs.converged;
    }
  } else if (method == "binning") {
    const int bins = parse_bins(bins_spec, x.rows());
    model.binning = fit_histogram_binning(x, y, bins);
    std::cout << "histogram binning fitted with " << bins << " bins per class\n";
  } else {
    throw DataError("unknown method '" + method + "'");
  }

  if (!out_path.empty()) {
    save_model(out_path, model);
    std::cout << "model written to " << out_path << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------- test ----

int run_test(const std::string& in_path, const std::string& model_path,
             const std::string& baseline_spec, const InputFlags& input, bool strict) {
  const PredictionData data = read_predictions(in_path, input.to_read_options(true));
  const ProbabilityMatrix& x = data.x;
  const LabelData& y = *data.y;

  TestResult test;
  if (model_path.empty()) {
    const int baseline = resolve_baseline(baseline_spec, x.category_names());
    OptimizerOptions options;
    options.compute_std_errors = false;
    const FitResult fit = fit_mle(x, y, baseline, options);
    print_warnings(fit.warnings);
    if (!fit.converged && strict) throw NumericalFailure("mcllo fit did not converge");
    test = lrt(x, y, fit);
  } else {
    const SavedModel model = load_model(model_path);
    if (model.method != "mcllo") throw DataError("test requires an mcllo model file");
    if (static_cast<Eigen::Index>(model.categories.size()) != x.cols())
      throw DataError("model category count does not match data");
    // The saved parameters stand in for the MLE point; if the model was fit
    // on different data the statistic is a lower bound on the refitted one.
    const MclloParams& params = *model.mcllo_params;
    const MclloParams id = MclloParams::identity(static_cast<int>(x.cols()), params.baseline);
    test = lrt_from_logliks(log_likelihood(x, y, id), log_likelihood(x, y, params),
                            static_cast<int>(x.cols()));
    std::cout << "using saved parameters from " << model_path << " as the MLE point\n";
  }
  if (x.rows() < 30 * (x.cols() - 1))
    std::cerr << "warning: asymptotic chi-square approximation may be coarse at n="
              << x.rows() << "\n";
  print_test_result(test);
  return kExitOk;
}

// -------------------------------------------------------------- apply ----

int run_apply(const std::string& in_path, const std::string& model_path,
              const std::string& out_path, const std::string& logits_path,
              const std::string& precision_spec, const InputFlags& input) {
  const SavedModel model = load_model(model_path);

  std::optional<PredictionData> data;
  std::optional<LogitMatrix> z;
  if (model.method == "temperature" || model.method == "vector") {
    const std::string source = logits_path.empty() ? in_path : logits_path;
    z = read_logits(source, input.to_read_options());
  } else {
    data = read_predictions(in_path, input.to_read_options());
    if (static_cast<Eigen::Index>(model.categories.size()) != data->x.cols())
      throw DataError("model category count does not match data");
  }

  const ProbabilityMatrix out = apply_model(model, data ? &data->x : nullptr,
                                            z ? &*z : nullptr, input.epsilon);
  const int precision = precision_spec == "full" ? -1 : std::stoi(precision_spec);
  const LabelData* labels = (data && data->y) ? &*data->y : nullptr;
  if (out_path.size() > 5 && out_path.compare(out_path.size() - 5, 5, ".json") == 0)
    write_predictions_json(out_path, out, labels);
  else
    write_predictions_csv(out_path, out, labels, precision);
  std::cout << "recalibrated predictions written to " << out_path << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ metrics ----

int run_metrics(const std::string& in_path, const std::string& before_path,
                const std::string& bins_spec, const std::string& reliability_path,
                int diagram_bins, const std::string& baseline_spec, bool no_test,
                const InputFlags& input, bool strict) {
  const PredictionData data = read_predictions(in_path, input.to_read_options(true));
  const ProbabilityMatrix& x = data.x;
  const LabelData& y = *data.y;

  CalibrationReport report;
  report.ece_bins = parse_bins(bins_spec, x.rows());
  report.ece = ece(x, y, report.ece_bins);
  report.mce = mce(x, y, report.ece_bins);
  report.accuracy = accuracy(x, y);

  std::cout << "n = " << x.rows() << ", c = " << x.cols() << "\n";
  std::cout << "ECE (" << report.ece_bins << " bins) = " << format_double(report.ece, 6) << "\n";
  std::cout << "MCE (" << report.ece_bins << " bins) = " << format_double(report.mce, 6) << "\n";
  std::cout << "accuracy = " << format_double(report.accuracy, 6) << "\n";

  if (!before_path.empty()) {
    const PredictionData before = read_predictions(before_path, input.to_read_options());
    if (before.x.rows() != x.rows() || before.x.cols() != x.cols())
      throw DataError("--before dimensions do not match --in");
    report.label_change_rate = label_change_rate(before.x, x);
    std::cout << "label change vs before = " << format_double(*report.label_change_rate, 6)
              << "\n";
  }

  if (!no_test) {
    const int baseline = resolve_baseline(baseline_spec, x.category_names());
    OptimizerOptions options;
    options.compute_std_errors = false;
    const FitResult fit = fit_mle(x, y, baseline, options);
    print_warnings(fit.warnings);
    if (!fit.converged && strict) throw NumericalFailure("mcllo fit did not converge");
    const TestResult test = lrt(x, y, fit);
    report.lrt_stat = test.statistic;
    report.df = test.df;
    report.p_value = test.p_value;
    print_test_result(test);
  }

  if (!reliability_path.empty()) {
    const ReliabilityBins rel = reliability(x, y, diagram_bins);
    write_reliability_csv(reliability_path, rel);
    std::cout << "reliability bins (" << diagram_bins << ") written to " << reliability_path
              << "\n";
  }
  return kExitOk;
}

// ----------------------------------------------------------- simulate ----

std::uint64_t seed_override(std::uint64_t seed) {
  if (const char* env = std::getenv("CALIKIT_SEED")) {
    try {
      return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw DataError("CALIKIT_SEED is not a valid integer");
    }
  }
  return seed;
}

std::string default_agg_path(const std::string& out_path) {
  const auto dot = out_path.rfind('.');
  if (dot == std::string::npos) return out_path + ".agg.csv";
  return out_path.substr(0, dot) + ".agg" + out_path.substr(dot);
}

int run_simulate(const std::string& study, const std::string& config_path,
                 const std::string& out_path, std::string agg_path, int threads_flag) {
  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open config: " + config_path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(config_path + ": invalid JSON: " + e.what());
  }

  StudyOptions options;
  options.c = cfg.value("c", 10);
  options.dirichlet_alpha = cfg.value("dirichlet_alpha", 1.0);
  options.reps = cfg.value("reps", 1000);
  options.alpha = cfg.value("alpha", 0.05);
  options.seed = seed_override(cfg.value("seed", 0ULL));
  options.threads = threads_flag != 0 ? threads_flag : cfg.value("threads", 0);

  if (agg_path.empty()) agg_path = default_agg_path(out_path);

  if (study == "consistency") {
    if (!cfg.contains("ns")) throw DataError("config needs 'ns' (sample sizes)");
    const auto ns = cfg["ns"].get<std::vector<long>>();
    MclloParams truth = MclloParams::identity(options.c, options.c - 1);
    if (cfg.contains("true_delta")) {
      const auto d = cfg["true_delta"].get<std::vector<double>>();
      if (static_cast<int>(d.size()) != options.c - 1)
        throw DataError("true_delta must have length c-1");
      truth.delta = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    }
    if (cfg.contains("true_gamma")) {
      const auto g = cfg["true_gamma"].get<std::vector<double>>();
      if (static_cast<int>(g.size()) != options.c - 1)
        throw DataError("true_gamma must have length c-1");
      truth.gamma = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    }
    const ConsistencyResult result = consistency_study(ns, truth, options);
    write_consistency_records_csv(out_path, result);
    write_consistency_cells_csv(agg_path, result);
    for (const auto& cell : result.cells)
      std::cout << "n=" << cell.n << "  median error = " << format_double(cell.median_error, 6)
                << "  sqrt(n)-scaled = " << format_double(cell.sqrt_n_scaled_error, 6) << "\n";
  } else {
    if (!cfg.contains("ns")) throw DataError("config needs 'ns' (sample sizes)");
    const auto ns = cfg["ns"].get<std::vector<long>>();
    const auto deltas = cfg.value("deltas", std::vector<double>{1.0});
    const StudyResult result =
        study == "power" ? power_study(ns, deltas, options) : ece_study(ns, deltas, options);
    write_study_records_csv(out_path, result);
    write_study_cells_csv(agg_path, result);
    for (const auto& cell : result.cells) {
      std::cout << "n=" << cell.n << " delta_1=" << format_double(cell.delta_1, 4);
      if (study == "power")
        std::cout << "  rejection rate = " << format_double(cell.rejection_rate, 6);
      else
        std::cout << "  mean ECE(X) = " << format_double(cell.mean_ece_x, 6)
                  << "  mean ECE(X*) = " << format_double(cell.mean_ece_xstar, 6);
      if (cell.non_converged > 0) std::cout << "  [" << cell.non_converged << " non-converged]";
      std::cout << "\n";
    }
  }
  std::cout << "per-rep records written to " << out_path << ", cell summaries to " << agg_path
            << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ compare ----

struct CompareRow {
  std::string set;
  long n = 0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double lrt_stat = std::numeric_limits<double>::quiet_NaN();
  int df = 0;
  double ece_value = std::numeric_limits<double>::quiet_NaN();
  int ece_bins = 0;
  double acc = std::numeric_limits<double>::quiet_NaN();
  double label_change = std::numeric_limits<double>::quiet_NaN();
};

CompareRow evaluate_set(const std::string& name, const ProbabilityMatrix& x, const LabelData& y,
                        int baseline, const ProbabilityMatrix* reference) {
  CompareRow row;
  row.set = name;
  row.n = x.rows();
  OptimizerOptions options;
  options.compute_std_errors = false;
  const FitResult fit = fit_mle(x, y, baseline, options);
  const TestResult test = lrt(x, y, fit);
  row.p_value = test.p_value;
  row.lrt_stat = test.statistic;
  row.df = test.df;
  row.ece_bins = sqrt_rule_bins(x.rows());
  row.ece_value = ece(x, y, row.ece_bins);
  row.acc = accuracy(x, y);
  if (reference != nullptr) row.label_change = label_change_rate(*reference, x);
  return row;
}

int run_compare(const std::string& train_path, const std::string& holdout_path,
                const std::string& logits_train_path, const std::string& logits_holdout_path,
                const std::string& baseline_spec, const std::string& out_path,
                const InputFlags& input) {
  const PredictionData train = read_predictions(train_path, input.to_read_options(true));
  const PredictionData holdout = read_predictions(holdout_path, input.to_read_options(true));
  if (train.x.cols() != holdout.x.cols())
    throw DataError("train and holdout category counts differ");
  const int baseline = resolve_baseline(baseline_spec, train.x.category_names());

  std::optional<LogitMatrix> z_train, z_holdout;
  if (!logits_train_path.empty() != !logits_holdout_path.empty())
    throw DataError("provide both --logits-train and --logits-holdout, or neither");
  if (!logits_train_path.empty()) {
    z_train = read_logits(logits_train_path, input.to_read_options());
    z_holdout = read_logits(logits_holdout_path, input.to_read_options());
    if (z_train->rows() != train.x.rows() || z_holdout->rows() != holdout.x.rows())
      throw DataError("logits row counts do not match prediction files");
    if (z_train->cols() != train.x.cols() || z_holdout->cols() != holdout.x.cols())
      throw DataError("logits column counts do not match prediction files");
  } else {
    std::cerr << "notice: logits not provided; temperature scaling and vector scaling "
                 "do not apply and are skipped\n";
  }

  std::vector<CompareRow> rows;
  rows.push_back(evaluate_set("train", train.x, *train.y, baseline, nullptr));
  rows.push_back(evaluate_set("holdout", holdout.x, *holdout.y, baseline, nullptr));

  // MCLLO: learn on train, recalibrate holdout.
  const FitResult mcllo_fit = fit_mle(train.x, *train.y, baseline);
  print_warnings(mcllo_fit.warnings);
  const ProbabilityMatrix mcllo_out = mcllo_map(holdout.x, mcllo_fit.params);
  rows.push_back(evaluate_set("mcllo", mcllo_out, *holdout.y, baseline, &holdout.x));

  // Histogram binning on probabilities.
  const BinningModel binning =
      fit_histogram_binning(train.x, *train.y, sqrt_rule_bins(train.x.rows()));
  const ProbabilityMatrix binning_out = apply_histogram_binning(binning, holdout.x);
  rows.push_back(evaluate_set("binning", binning_out, *holdout.y, baseline, &holdout.x));

  if (z_train) {
    const TemperatureModel tm = fit_temperature(*z_train, *train.y);
    const ProbabilityMatrix ts_out = apply_temperature(*z_holdout, tm.temperature, input.epsilon,
                                                       holdout.x.category_names());
    rows.push_back(evaluate_set("temperature", ts_out, *holdout.y, baseline, &holdout.x));

    const VectorScalingModel vs = fit_vector_scaling(*z_train, *train.y);
    const ProbabilityMatrix vs_out =
        apply_vector_scaling(*z_holdout, vs, input.epsilon, holdout.x.category_names());
    rows.push_back(evaluate_set("vector", vs_out, *holdout.y, baseline, &holdout.x));
  }

  char line[200];
  std::snprintf(line, sizeof(line), "%-12s %7s %10s %10s %10s %14s", "set", "n", "p_value",
                "ece", "accuracy", "label_change");
  std::cout << line << "\n";
  for (const auto& row : rows) {
    const std::string p_text = row.p_value < 0.001 ? "<0.001" : format_double(row.p_value, 3);
    const std::string change_text =
        std::isnan(row.label_change) ? "--" : format_double(100.0 * row.label_change, 3) + "%";
    std::snprintf(line, sizeof(line), "%-12s %7ld %10s %10s %9.1f%% %14s", row.set.c_str(),
                  row.n, p_text.c_str(), format_double(row.ece_value, 3).c_str(),
                  100.0 * row.acc, change_text.c_str());
    std::cout << line << "\n";
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write file: " + out_path);
    out << "set,n,p_value,lrt_stat,df,ece,ece_bins,accuracy,label_change_rate\n";
    for (const auto& row : rows) {
      out << row.set << ',' << row.n << ',' << format_double(row.p_value, -1) << ','
          << format_double(row.lrt_stat, -1) << ',' << row.df << ','
          << format_double(row.ece_value, -1) << ',' << row.ece_bins << ','
          << format_double(row.acc, -1) << ',' << format_double(row.label_change, -1) << '\n';
    }
    std::cout << "comparison table written to " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"calikit: calibration assessment and recalibration for multiclass "
               "probability predictions"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  bool strict = false;
  app.add_flag("--strict", strict, "Exit with code 3 on numerical non-convergence");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a recalibration model on labelled predictions");
  std::string fit_in, fit_out, fit_method = "mcllo", fit_baseline = "last", fit_bins = "sqrt";
  std::string fit_logits;
  InputFlags fit_input;
  fit_cmd->add_option("--in", fit_in, "Training predictions (CSV/JSON with labels)")->required();
  fit_cmd->add_option("--out", fit_out, "Model file to write (JSON)");
  fit_cmd->add_option("--method", fit_method, "mcllo|temperature|vector|binning")
      ->check(CLI::IsMember({"mcllo", "temperature", "vector", "binning"}));
  fit_cmd->add_option("--baseline", fit_baseline, "Baseline category name or 'last'");
  fit_cmd->add_option("--bins", fit_bins, "Binning method bins: 'sqrt' or integer");
  fit_cmd->add_option("--logits", fit_logits, "Logits file (temperature/vector methods)");
  fit_input.attach(fit_cmd);

  // test
  auto* test_cmd = app.add_subcommand("test", "Likelihood ratio test of calibration");
  std::string test_in, test_model, test_baseline = "last";
  InputFlags test_input;
  test_cmd->add_option("--in", test_in, "Predictions with labels")->required();
  test_cmd->add_option("--model", test_model, "Saved mcllo model (skips the internal fit)");
  test_cmd->add_option("--baseline", test_baseline, "Baseline category name or 'last'");
  test_input.attach(test_cmd);

  // apply
  auto* apply_cmd = app.add_subcommand("apply", "Apply a saved model to predictions");
  std::string apply_in, apply_model_path, apply_out, apply_logits, apply_precision = "6";
  InputFlags apply_input;
  apply_cmd->add_option("--in", apply_in, "Predictions to recalibrate")->required();
  apply_cmd->add_option("--model", apply_model_path, "Model file")->required();
  apply_cmd->add_option("--out", apply_out, "Output predictions file")->required();
  apply_cmd->add_option("--logits", apply_logits, "Logits file (temperature/vector models)");
  apply_cmd->add_option("--precision", apply_precision,
                        "Significant digits for probabilities, or 'full'");
  apply_input.attach(apply_cmd);

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Calibration metrics and reliability bins");
  std::string metrics_in, metrics_before, metrics_bins = "sqrt", metrics_rel,
              metrics_baseline = "last";
  int metrics_diagram_bins = 10;
  bool metrics_no_test = false;
  InputFlags metrics_input;
  metrics_cmd->add_option("--in", metrics_in, "Predictions with labels")->required();
  metrics_cmd->add_option("--before", metrics_before,
                          "Earlier predictions for the label-change rate");
  metrics_cmd->add_option("--bins", metrics_bins, "ECE bins: 'sqrt' or integer");
  metrics_cmd->add_option("--reliability-out", metrics_rel, "Write reliability bins CSV here");
  metrics_cmd->add_option("--diagram-bins", metrics_diagram_bins,
                          "Reliability diagram bin count (default 10)");
  metrics_cmd->add_flag("--no-test", metrics_no_test, "Skip the likelihood ratio test");
  metrics_cmd->add_option("--baseline", metrics_baseline, "Baseline category name or 'last'");
  metrics_input.attach(metrics_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo studies (power, ece, consistency)");
  std::string sim_study, sim_config, sim_out, sim_agg;
  int sim_threads = 0;
  sim_cmd->add_option("study", sim_study, "power|ece|consistency")
      ->required()
      ->check(CLI::IsMember({"power", "ece", "consistency"}));
  sim_cmd->add_option("--config", sim_config, "Study configuration JSON")->required();
  sim_cmd->add_option("--out", sim_out, "Per-repetition records CSV")->required();
  sim_cmd->add_option("--agg-out", sim_agg, "Cell summary CSV (default: <out>.agg.csv)");
  sim_cmd->add_option("--threads", sim_threads, "Worker threads (0 = hardware)");

  // compare
  auto* compare_cmd =
      app.add_subcommand("compare", "Fit-and-apply comparison of recalibration methods");
  std::string cmp_train, cmp_holdout, cmp_ztrain, cmp_zholdout, cmp_baseline = "last", cmp_out;
  InputFlags cmp_input;
  compare_cmd->add_option("--train", cmp_train, "Training predictions with labels")->required();
  compare_cmd->add_option("--holdout", cmp_holdout, "Holdout predictions with labels")
      ->required();
  compare_cmd->add_option("--logits-train", cmp_ztrain, "Training logits (enables scaling)");
  compare_cmd->add_option("--logits-holdout", cmp_zholdout, "Holdout logits");
  compare_cmd->add_option("--baseline", cmp_baseline, "Baseline category name or 'last'");
  compare_cmd->add_option("--out", cmp_out, "Comparison table CSV");
  cmp_input.attach(compare_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(fit_cmd))
      return run_fit(fit_in, fit_out, fit_method, fit_baseline, fit_bins, fit_logits, fit_input,
                     strict);
    if (app.got_subcommand(test_cmd))
      return run_test(test_in, test_model, test_baseline, test_input, strict);
    if (app.got_subcommand(apply_cmd))
      return run_apply(apply_in, apply_model_path, apply_out, apply_logits, apply_precision,
                       apply_input);
    if (app.got_subcommand(metrics_cmd))
      return run_metrics(metrics_in, metrics_before, metrics_bins, metrics_rel,
                         metrics_diagram_bins, metrics_baseline, metrics_no_test, metrics_input,
                         strict);
    if (app.got_subcommand(sim_cmd))
      return run_simulate(sim_study, sim_config, sim_out, sim_agg, sim_threads);
    if (app.got_subcommand(compare_cmd))
      return run_compare(cmp_train, cmp_holdout, cmp_ztrain, cmp_zholdout, cmp_baseline, cmp_out,
                         cmp_input);
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace calikit
