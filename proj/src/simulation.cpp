#include "calikit/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "calikit/inference.hpp"
#include "calikit/mcllo.hpp"
#include "calikit/metrics.hpp"

namespace calikit {

namespace {

std::uint64_t bits_of(double v) { return std::bit_cast<std::uint64_t>(v); }

// Folds the generating truth into stream key words so a cell's streams are a
// pure function of its parameters, not of grid position.
std::vector<std::uint64_t> stream_key(long n, double dirichlet_alpha, const MclloParams& truth,
                                      std::uint64_t rep) {
  std::vector<std::uint64_t> key;
  key.reserve(5 + 2 * static_cast<std::size_t>(truth.delta.size()));
  key.push_back(static_cast<std::uint64_t>(n));
  key.push_back(static_cast<std::uint64_t>(truth.num_categories()));
  key.push_back(static_cast<std::uint64_t>(truth.baseline));
  key.push_back(bits_of(dirichlet_alpha));
  for (Eigen::Index j = 0; j < truth.delta.size(); ++j) key.push_back(bits_of(truth.delta[j]));
  for (Eigen::Index j = 0; j < truth.gamma.size(); ++j) key.push_back(bits_of(truth.gamma[j]));
  key.push_back(rep);
  return key;
}

MclloParams shift_only_truth(int c, double delta_1) {
  MclloParams truth = MclloParams::identity(c, c - 1);
  truth.delta[0] = delta_1;
  return truth;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

SimRepRecord run_rep(long n, double dirichlet_alpha, const MclloParams& truth, double delta_1,
                     std::uint64_t seed, int rep) {
  Dataset data = generate_with_truth(n, dirichlet_alpha, truth, seed,
                                     static_cast<std::uint64_t>(rep));
  OptimizerOptions fit_options;
  fit_options.compute_std_errors = false;  // reporting-only, skipped in bulk runs
  const FitResult fit = fit_mle(data.x, data.y, truth.baseline, fit_options);
  const TestResult test = lrt(data.x, data.y, fit);
  const ProbabilityMatrix xstar = mcllo_map(data.x, fit.params);
  const int bins = sqrt_rule_bins(n);

  SimRepRecord rec;
  rec.n = n;
  rec.delta_1 = delta_1;
  rec.rep = rep;
  rec.converged = fit.converged;
  rec.lrt_stat = test.statistic;
  rec.p_value = test.p_value;
  rec.ece_x = ece(data.x, data.y, bins);
  rec.ece_xstar = ece(xstar, data.y, bins);
  rec.delta_hat = fit.params.delta;
  rec.gamma_hat = fit.params.gamma;
  return rec;
}

StudyResult run_grid_study(const std::vector<long>& ns, const std::vector<double>& deltas,
                           const StudyOptions& options) {
  if (ns.empty() || deltas.empty()) throw std::invalid_argument("study grid is empty");
  if (options.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (options.c < 2) throw std::invalid_argument("need at least two categories");

  struct Cell {
    long n;
    double delta_1;
    MclloParams truth;
  };
  std::vector<Cell> cells;
  for (long n : ns)
    for (double d : deltas) cells.push_back({n, d, shift_only_truth(options.c, d)});

  StudyResult result;
  result.records.resize(cells.size() * static_cast<std::size_t>(options.reps));
  parallel_for(static_cast<int>(result.records.size()), options.threads, [&](int idx) {
    const auto cell_idx = static_cast<std::size_t>(idx) / static_cast<std::size_t>(options.reps);
    const int rep = idx % options.reps;
    const Cell& cell = cells[cell_idx];
    result.records[static_cast<std::size_t>(idx)] =
        run_rep(cell.n, options.dirichlet_alpha, cell.truth, cell.delta_1, options.seed, rep);
  });

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellSummary summary;
    summary.n = cells[ci].n;
    summary.delta_1 = cells[ci].delta_1;
    summary.reps = options.reps;
    long rejections = 0;
    for (int rep = 0; rep < options.reps; ++rep) {
      const SimRepRecord& rec =
          result.records[ci * static_cast<std::size_t>(options.reps) + static_cast<std::size_t>(rep)];
      if (rec.p_value < options.alpha) ++rejections;
      summary.mean_stat += rec.lrt_stat;
      summary.mean_ece_x += rec.ece_x;
      summary.mean_ece_xstar += rec.ece_xstar;
      if (!rec.converged) ++summary.non_converged;
    }
    summary.rejection_rate = static_cast<double>(rejections) / options.reps;
    summary.mean_stat /= options.reps;
    summary.mean_ece_x /= options.reps;
    summary.mean_ece_xstar /= options.reps;
    summary.mean_ece_diff = summary.mean_ece_x - summary.mean_ece_xstar;
    result.cells.push_back(summary);
  }
  return result;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  if (c < 2) throw std::invalid_argument("need at least two categories");
  if (!(delta_1 > 0.0)) throw std::invalid_argument("delta_1 must be positive");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet_alpha must be positive");
}

Dataset generate_with_truth(long n, double dirichlet_alpha, const MclloParams& truth,
                            std::uint64_t seed, std::uint64_t rep) {
  truth.validate();
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  const int c = truth.num_categories();
  const auto key = stream_key(n, dirichlet_alpha, truth, rep);
  StreamRng rng = StreamRng::keyed(seed, std::span<const std::uint64_t>(key));

  Eigen::MatrixXd raw(n, c);
  for (long i = 0; i < n; ++i) {
    const std::vector<double> row = rng.dirichlet(c, dirichlet_alpha);
    for (int j = 0; j < c; ++j) raw(i, j) = row[static_cast<std::size_t>(j)];
  }
  ProbabilityMatrix x = ProbabilityMatrix::validate_and_floor(raw);
  const ProbabilityMatrix g = mcllo_map(x, truth);

  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(c));
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) row[static_cast<std::size_t>(j)] = g.values()(i, j);
    labels[static_cast<std::size_t>(i)] = rng.categorical(row);
  }
  return Dataset{std::move(x), LabelData::from_indices(std::move(labels), c)};
}

Dataset generate_dataset(const SimConfig& config, std::uint64_t rep) {
  config.validate();
  return generate_with_truth(config.n, config.dirichlet_alpha,
                             shift_only_truth(config.c, config.delta_1), config.seed, rep);
}

StudyResult power_study(const std::vector<long>& ns, const std::vector<double>& deltas,
                        const StudyOptions& options) {
  return run_grid_study(ns, deltas, options);
}

StudyResult ece_study(const std::vector<long>& ns, const std::vector<double>& deltas,
                      const StudyOptions& options) {
  return run_grid_study(ns, deltas, options);
}

ConsistencyResult consistency_study(const std::vector<long>& ns, const MclloParams& truth,
                                    const StudyOptions& options) {
  truth.validate();
  if (ns.empty()) throw std::invalid_argument("study grid is empty");
  if (options.reps < 1) throw std::invalid_argument("reps must be >= 1");

  ConsistencyResult result;
  result.records.resize(ns.size() * static_cast<std::size_t>(options.reps));
  parallel_for(static_cast<int>(result.records.size()), options.threads, [&](int idx) {
    const auto cell_idx = static_cast<std::size_t>(idx) / static_cast<std::size_t>(options.reps);
    const int rep = idx % options.reps;
    const long n = ns[cell_idx];

    Dataset data = generate_with_truth(n, options.dirichlet_alpha, truth, options.seed,
                                       static_cast<std::uint64_t>(rep));
    OptimizerOptions fit_options;
    fit_options.compute_std_errors = false;
    const FitResult fit = fit_mle(data.x, data.y, truth.baseline, fit_options);

    ConsistencyRecord rec;
    rec.n = n;
    rec.rep = rep;
    rec.converged = fit.converged;
    const double err_delta = (fit.params.delta - truth.delta).squaredNorm();
    const double err_gamma = (fit.params.gamma - truth.gamma).squaredNorm();
    rec.error = std::sqrt(err_delta + err_gamma);
    result.records[static_cast<std::size_t>(idx)] = rec;
  });

  for (std::size_t ci = 0; ci < ns.size(); ++ci) {
    ConsistencyCell cell;
    cell.n = ns[ci];
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(options.reps));
    for (int rep = 0; rep < options.reps; ++rep) {
      const ConsistencyRecord& rec =
          result.records[ci * static_cast<std::size_t>(options.reps) + static_cast<std::size_t>(rep)];
      errors.push_back(rec.error);
      if (!rec.converged) ++cell.non_converged;
    }
    cell.median_error = median(std::move(errors));
    cell.sqrt_n_scaled_error = std::sqrt(static_cast<double>(cell.n)) * cell.median_error;
    result.cells.push_back(cell);
  }
  return result;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace calikit
