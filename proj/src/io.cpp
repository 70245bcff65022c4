#include "calikit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "calikit/mcllo.hpp"
#include "calikit/version.hpp"

namespace calikit {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  std::stringstream ss(line);
  while (std::getline(ss, current, ',')) fields.push_back(trim(current));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_numbers;  // 1-based source line per data row
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(path + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw DataError(path + ": missing header row");
  return table;
}

double parse_double(const std::string& field, const std::string& path, long line) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw DataError(path + " line " + std::to_string(line) + ": malformed number '" + field + "'");
  return value;
}

bool is_json_path(const std::string& path, const std::string& format) {
  if (format == "json") return true;
  if (format == "csv") return false;
  return path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

// Resolves which header columns hold the value matrix. Returns (indices,
// category names).
std::pair<std::vector<std::size_t>, std::vector<std::string>> resolve_value_columns(
    const std::vector<std::string>& header, const std::string& prefix,
    const std::vector<std::string>& explicit_columns, const std::string& label_column,
    const std::string& path) {
  std::vector<std::size_t> indices;
  std::vector<std::string> names;
  if (!explicit_columns.empty()) {
    for (const auto& want : explicit_columns) {
      const auto it = std::find(header.begin(), header.end(), want);
      if (it == header.end()) throw DataError(path + ": column '" + want + "' not found");
      indices.push_back(static_cast<std::size_t>(it - header.begin()));
      names.push_back(want);
    }
    return {indices, names};
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].rfind(prefix, 0) == 0) {
      indices.push_back(j);
      names.push_back(header[j].substr(prefix.size()));
    }
  }
  if (!indices.empty()) return {indices, names};
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) continue;
    indices.push_back(j);
    names.push_back(header[j]);
  }
  return {indices, names};
}

LabelData labels_from_strings(const std::vector<std::string>& raw,
                              const std::vector<std::string>& categories,
                              const std::vector<long>& lines, const std::string& path) {
  // Name match is authoritative; integer indices are accepted as a fallback.
  std::vector<int> indices(raw.size());
  const int c = static_cast<int>(categories.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto it = std::find(categories.begin(), categories.end(), raw[i]);
    if (it != categories.end()) {
      indices[i] = static_cast<int>(it - categories.begin());
      continue;
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(raw[i].data(), raw[i].data() + raw[i].size(), value);
    if (ec == std::errc{} && ptr == raw[i].data() + raw[i].size() && value >= 0 && value < c) {
      indices[i] = value;
      continue;
    }
    throw DataError(path + " line " + std::to_string(lines[i]) + ": unknown label value '" +
                    raw[i] + "'");
  }
  return LabelData::from_indices(std::move(indices), c, categories);
}

PredictionData predictions_from_json(const std::string& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  if (!j.contains("probabilities") || !j["probabilities"].is_array())
    throw DataError(path + ": missing 'probabilities' array");

  std::vector<std::string> categories = options.categories;
  if (categories.empty() && j.contains("categories"))
    categories = j["categories"].get<std::vector<std::string>>();

  const auto& probs = j["probabilities"];
  const auto n = static_cast<Eigen::Index>(probs.size());
  if (n == 0) throw DataError(path + ": empty probability array");
  const auto c = static_cast<Eigen::Index>(probs[0].size());
  Eigen::MatrixXd raw(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(probs[i].size()) != c)
      throw DataError(path + ": ragged probability rows");
    for (Eigen::Index k = 0; k < c; ++k) raw(i, k) = probs[i][k].get<double>();
  }

  ProbabilityMatrix x = ProbabilityMatrix::validate_and_floor(raw, options.floor_epsilon,
                                                              categories);
  std::optional<LabelData> y;
  if (j.contains("labels")) {
    const auto& jl = j["labels"];
    if (static_cast<Eigen::Index>(jl.size()) != n)
      throw DataError(path + ": label count does not match probability rows");
    if (!jl.empty() && jl[0].is_string()) {
      std::vector<std::string> raw_labels = jl.get<std::vector<std::string>>();
      y = LabelData::from_strings(raw_labels, x.category_names());
    } else {
      std::vector<int> idx = jl.get<std::vector<int>>();
      y = LabelData::from_indices(std::move(idx), static_cast<int>(c));
    }
  }
  if (options.require_labels && !y) throw DataError(path + ": label data required but absent");
  return PredictionData{std::move(x), std::move(y)};
}

json params_to_json(const SavedModel& model) {
  json p;
  if (model.method == "mcllo") {
    const auto& mp = *model.mcllo_params;
    p["delta"] = std::vector<double>(mp.delta.begin(), mp.delta.end());
    p["gamma"] = std::vector<double>(mp.gamma.begin(), mp.gamma.end());
  } else if (model.method == "temperature") {
    p["temperature"] = *model.temperature;
  } else if (model.method == "vector") {
    const auto& vs = *model.vector_scaling;
    p["w"] = std::vector<double>(vs.w.begin(), vs.w.end());
    p["b"] = std::vector<double>(vs.b.begin(), vs.b.end());
  } else if (model.method == "binning") {
    const auto& bm = *model.binning;
    p["bins"] = bm.bins;
    std::vector<std::vector<double>> values;
    for (Eigen::Index j = 0; j < bm.values.rows(); ++j)
      values.emplace_back(bm.values.row(j).begin(), bm.values.row(j).end());
    p["values"] = values;
  }
  return p;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = arr[static_cast<std::size_t>(i)].is_null()
               ? std::numeric_limits<double>::quiet_NaN()
               : arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "";
  char buf[64];
  if (precision < 0) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  }
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

PredictionData read_predictions(const std::string& path, const ReadOptions& options) {
  if (is_json_path(path, options.format)) return predictions_from_json(path, options);

  const CsvTable table = read_csv(path);
  const auto [indices, column_names] = resolve_value_columns(
      table.header, options.prob_prefix, options.prob_columns, options.label_column, path);
  if (indices.size() < 2) throw DataError(path + ": found fewer than two probability columns");

  std::vector<std::string> categories =
      options.categories.empty() ? column_names : options.categories;
  if (categories.size() != column_names.size())
    throw DataError(path + ": --categories count does not match probability columns");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw DataError(path + ": no data rows");
  const auto c = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd raw(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const long line = table.line_numbers[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (Eigen::Index k = 0; k < c; ++k) {
      raw(i, k) = parse_double(row[indices[static_cast<std::size_t>(k)]], path, line);
      sum += raw(i, k);
    }
    if (!(std::abs(sum - 1.0) <= 1e-6))
      throw DataError(path + " line " + std::to_string(line) + ": probabilities sum to " +
                      format_double(sum, 6) + ", expected 1");
  }
  ProbabilityMatrix x =
      ProbabilityMatrix::validate_and_floor(raw, options.floor_epsilon, categories);

  std::optional<LabelData> y;
  const auto label_it = std::find(table.header.begin(), table.header.end(), options.label_column);
  if (label_it != table.header.end()) {
    const auto col = static_cast<std::size_t>(label_it - table.header.begin());
    std::vector<std::string> raw_labels;
    raw_labels.reserve(table.rows.size());
    for (const auto& row : table.rows) raw_labels.push_back(row[col]);
    y = labels_from_strings(raw_labels, x.category_names(), table.line_numbers, path);
  }
  if (options.require_labels && !y)
    throw DataError(path + ": label column '" + options.label_column + "' required but absent");
  return PredictionData{std::move(x), std::move(y)};
}

LogitMatrix read_logits(const std::string& path, const ReadOptions& options) {
  if (is_json_path(path, options.format)) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError(path + ": invalid JSON: " + e.what());
    }
    const auto& arr = j.contains("logits") ? j["logits"] : j;
    if (!arr.is_array() || arr.empty()) throw DataError(path + ": missing 'logits' array");
    const auto n = static_cast<Eigen::Index>(arr.size());
    const auto c = static_cast<Eigen::Index>(arr[0].size());
    Eigen::MatrixXd values(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(arr[i].size()) != c)
        throw DataError(path + ": ragged logit rows");
      for (Eigen::Index k = 0; k < c; ++k) values(i, k) = arr[i][k].get<double>();
    }
    return LogitMatrix::from(std::move(values));
  }

  const CsvTable table = read_csv(path);
  const auto [indices, names] = resolve_value_columns(table.header, options.logit_prefix, {},
                                                      options.label_column, path);
  if (indices.size() < 2) throw DataError(path + ": found fewer than two logit columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw DataError(path + ": no data rows");
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const long line = table.line_numbers[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < indices.size(); ++k)
      values(i, static_cast<Eigen::Index>(k)) = parse_double(row[indices[k]], path, line);
  }
  return LogitMatrix::from(std::move(values));
}

void write_predictions_csv(const std::string& path, const ProbabilityMatrix& x,
                           const LabelData* y, int precision) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (j > 0) out << ',';
    out << "p_" << x.category_names()[static_cast<std::size_t>(j)];
  }
  if (y != nullptr) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(x.values()(i, j), precision);
    }
    if (y != nullptr)
      out << ',' << y->category_names()[static_cast<std::size_t>(y->label(static_cast<int>(i)))];
    out << '\n';
  }
}

void write_predictions_json(const std::string& path, const ProbabilityMatrix& x,
                            const LabelData* y) {
  json j;
  j["categories"] = x.category_names();
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    rows.emplace_back(x.values().row(i).begin(), x.values().row(i).end());
  j["probabilities"] = rows;
  if (y != nullptr) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(y->size()));
    for (int i = 0; i < y->size(); ++i)
      labels.push_back(y->category_names()[static_cast<std::size_t>(y->label(i))]);
    j["labels"] = labels;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

void write_reliability_csv(const std::string& path, const ReliabilityBins& bins) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "bin_lo,bin_hi,count,mean_conf,accuracy\n";
  for (const auto& bin : bins.bins) {
    out << format_double(bin.lo, -1) << ',' << format_double(bin.hi, -1) << ',' << bin.count
        << ',' << format_double(bin.mean_confidence, -1) << ','
        << format_double(bin.accuracy, -1) << '\n';
  }
}

void write_study_records_csv(const std::string& path, const StudyResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  const auto k = result.records.empty() ? 0 : result.records.front().delta_hat.size();
  out << "n,delta_1,rep,converged,lrt_stat,p_value,ece_x,ece_xstar";
  for (Eigen::Index j = 0; j < k; ++j) out << ",delta_hat_" << (j + 1);
  for (Eigen::Index j = 0; j < k; ++j) out << ",gamma_hat_" << (j + 1);
  out << '\n';
  for (const auto& rec : result.records) {
    out << rec.n << ',' << format_double(rec.delta_1, -1) << ',' << rec.rep << ','
        << (rec.converged ? 1 : 0) << ',' << format_double(rec.lrt_stat, -1) << ','
        << format_double(rec.p_value, -1) << ',' << format_double(rec.ece_x, -1) << ','
        << format_double(rec.ece_xstar, -1);
    for (Eigen::Index j = 0; j < k; ++j) out << ',' << format_double(rec.delta_hat[j], -1);
    for (Eigen::Index j = 0; j < k; ++j) out << ',' << format_double(rec.gamma_hat[j], -1);
    out << '\n';
  }
}

void write_study_cells_csv(const std::string& path, const StudyResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "n,delta_1,reps,rejection_rate,mean_stat,mean_ece_x,mean_ece_xstar,mean_ece_diff,"
         "non_converged\n";
  for (const auto& cell : result.cells) {
    out << cell.n << ',' << format_double(cell.delta_1, -1) << ',' << cell.reps << ','
        << format_double(cell.rejection_rate, -1) << ',' << format_double(cell.mean_stat, -1)
        << ',' << format_double(cell.mean_ece_x, -1) << ','
        << format_double(cell.mean_ece_xstar, -1) << ',' << format_double(cell.mean_ece_diff, -1)
        << ',' << cell.non_converged << '\n';
  }
}

void write_consistency_records_csv(const std::string& path, const ConsistencyResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "n,rep,error,converged\n";
  for (const auto& rec : result.records)
    out << rec.n << ',' << rec.rep << ',' << format_double(rec.error, -1) << ','
        << (rec.converged ? 1 : 0) << '\n';
}

void write_consistency_cells_csv(const std::string& path, const ConsistencyResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "n,median_error,sqrt_n_scaled_error,non_converged\n";
  for (const auto& cell : result.cells)
    out << cell.n << ',' << format_double(cell.median_error, -1) << ','
        << format_double(cell.sqrt_n_scaled_error, -1) << ',' << cell.non_converged << '\n';
}

void save_model(const std::string& path, const SavedModel& model) {
  json j;
  j["method"] = model.method;
  j["categories"] = model.categories;
  j["baseline"] = model.baseline;
  j["parameters"] = params_to_json(model);
  if (model.method == "mcllo" && model.mcllo_std_errors.size() > 0) {
    json se = json::array();
    for (Eigen::Index i = 0; i < model.mcllo_std_errors.size(); ++i) {
      if (std::isnan(model.mcllo_std_errors[i]))
        se.push_back(nullptr);
      else
        se.push_back(model.mcllo_std_errors[i]);
    }
    j["std_errors"] = se;
  }
  json fit;
  fit["n"] = model.n;
  if (std::isnan(model.loglik))
    fit["loglik"] = nullptr;
  else
    fit["loglik"] = model.loglik;
  fit["converged"] = model.converged;
  j["fit"] = fit;
  j["toolkit_version"] = model.toolkit_version.empty() ? kVersion : model.toolkit_version;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }

  SavedModel model;
  try {
    model.method = j.at("method").get<std::string>();
    model.categories = j.at("categories").get<std::vector<std::string>>();
    model.baseline = j.value("baseline", -1);
    const json& p = j.at("parameters");
    if (model.method == "mcllo") {
      MclloParams mp;
      mp.delta = vector_from_json(p.at("delta"));
      mp.gamma = vector_from_json(p.at("gamma"));
      mp.baseline = model.baseline;
      mp.validate();
      model.mcllo_params = std::move(mp);
      if (j.contains("std_errors")) model.mcllo_std_errors = vector_from_json(j["std_errors"]);
    } else if (model.method == "temperature") {
      model.temperature = p.at("temperature").get<double>();
    } else if (model.method == "vector") {
      VectorScalingModel vs;
      vs.w = vector_from_json(p.at("w"));
      vs.b = vector_from_json(p.at("b"));
      model.vector_scaling = std::move(vs);
    } else if (model.method == "binning") {
      BinningModel bm;
      bm.bins = p.at("bins").get<int>();
      const auto rows = p.at("values").get<std::vector<std::vector<double>>>();
      bm.values.resize(static_cast<Eigen::Index>(rows.size()), bm.bins);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != bm.bins)
          throw DataError(path + ": binning values shape mismatch");
        for (int b = 0; b < bm.bins; ++b) bm.values(static_cast<Eigen::Index>(r), b) = rows[r][static_cast<std::size_t>(b)];
      }
      model.binning = std::move(bm);
    } else {
      throw DataError(path + ": unknown model method '" + model.method + "'");
    }
    if (j.contains("fit")) {
      const json& fit = j["fit"];
      model.n = fit.value("n", 0L);
      model.loglik = fit.contains("loglik") && !fit["loglik"].is_null()
                         ? fit["loglik"].get<double>()
                         : std::numeric_limits<double>::quiet_NaN();
      model.converged = fit.value("converged", true);
    }
    model.toolkit_version = j.value("toolkit_version", "");
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed model file: " + e.what());
  }
  return model;
}

ProbabilityMatrix apply_model(const SavedModel& model, const ProbabilityMatrix* x,
                              const LogitMatrix* z, double floor_epsilon) {
  if (model.method == "mcllo") {
    if (x == nullptr) throw DataError("mcllo model needs probability predictions");
    return mcllo_map(*x, *model.mcllo_params);
  }
  if (model.method == "binning") {
    if (x == nullptr) throw DataError("binning model needs probability predictions");
    return apply_histogram_binning(*model.binning, *x);
  }
  if (model.method == "temperature") {
    if (z == nullptr) throw DataError("temperature model needs a logits file");
    return apply_temperature(*z, *model.temperature, floor_epsilon, model.categories);
  }
  if (model.method == "vector") {
    if (z == nullptr) throw DataError("vector scaling model needs a logits file");
    return apply_vector_scaling(*z, *model.vector_scaling, floor_epsilon, model.categories);
  }
  throw DataError("unknown model method '" + model.method + "'");
}

}  // namespace calikit
