#include "calikit/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace calikit {

namespace {

std::vector<std::string> default_names(Eigen::Index c) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(c));
  for (Eigen::Index j = 0; j < c; ++j) names.push_back("class_" + std::to_string(j));
  return names;
}

}  // namespace

ProbabilityMatrix ProbabilityMatrix::validate_and_floor(const Eigen::MatrixXd& raw,
                                                        double epsilon,
                                                        std::vector<std::string> category_names) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index c = raw.cols();
  if (n < 1) throw std::invalid_argument("probability matrix needs at least one row");
  if (c < 2) throw std::invalid_argument("probability matrix needs at least two categories");
  if (!(epsilon > 0.0) || epsilon >= 1.0 / static_cast<double>(c))
    throw std::invalid_argument("floor epsilon must lie in (0, 1/c)");
  if (!category_names.empty() && static_cast<Eigen::Index>(category_names.size()) != c)
    throw std::invalid_argument("category_names size does not match column count");

  constexpr double kRowSumSlack = 1e-6;
  constexpr double kEntrySlack = 1e-9;
  Eigen::MatrixXd values = raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) {
      const double v = values(i, j);
      if (!std::isfinite(v))
        throw std::invalid_argument("row " + std::to_string(i) + ": non-finite probability");
      if (v < -kEntrySlack || v > 1.0 + kEntrySlack)
        throw std::invalid_argument("row " + std::to_string(i) + ": probability outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumSlack)
      throw std::invalid_argument("row " + std::to_string(i) + ": probabilities sum to " +
                                  std::to_string(sum) + ", expected 1");
    double floored_sum = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) {
      values(i, j) = std::max(values(i, j), epsilon);
      floored_sum += values(i, j);
    }
    values.row(i) /= floored_sum;
  }

  if (category_names.empty()) category_names = default_names(c);
  return ProbabilityMatrix(std::move(values), epsilon, std::move(category_names));
}

LabelData LabelData::from_indices(std::vector<int> labels, int num_categories,
                                  std::vector<std::string> category_names) {
  if (num_categories < 2) throw std::invalid_argument("need at least two categories");
  if (labels.empty()) throw std::invalid_argument("label vector is empty");
  if (!category_names.empty() && static_cast<int>(category_names.size()) != num_categories)
    throw std::invalid_argument("category_names size does not match category count");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_categories)
      throw std::invalid_argument("label at row " + std::to_string(i) + " out of range [0, " +
                                  std::to_string(num_categories) + ")");
  }
  if (category_names.empty()) category_names = default_names(num_categories);
  return LabelData(std::move(labels), num_categories, std::move(category_names));
}

LabelData LabelData::from_strings(const std::vector<std::string>& labels,
                                  std::vector<std::string> category_names) {
  if (labels.empty()) throw std::invalid_argument("label vector is empty");
  std::unordered_map<std::string, int> index;
  const bool fixed = !category_names.empty();
  for (std::size_t j = 0; j < category_names.size(); ++j)
    index[category_names[j]] = static_cast<int>(j);

  std::vector<int> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = index.find(labels[i]);
    if (it == index.end()) {
      if (fixed)
        throw std::invalid_argument("unknown label value '" + labels[i] + "' at row " +
                                    std::to_string(i));
      const int id = static_cast<int>(category_names.size());
      category_names.push_back(labels[i]);
      it = index.emplace(labels[i], id).first;
    }
    out.push_back(it->second);
  }
  const int c = static_cast<int>(category_names.size());
  if (c < 2) throw std::invalid_argument("need at least two categories");
  return LabelData(std::move(out), c, std::move(category_names));
}

Eigen::MatrixXd LabelData::one_hot() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size(), num_categories_);
  for (int i = 0; i < size(); ++i) out(i, labels_[static_cast<std::size_t>(i)]) = 1.0;
  return out;
}

std::vector<long> LabelData::counts() const {
  std::vector<long> out(static_cast<std::size_t>(num_categories_), 0);
  for (int l : labels_) ++out[static_cast<std::size_t>(l)];
  return out;
}

LogitMatrix LogitMatrix::from(Eigen::MatrixXd values) {
  if (values.rows() < 1 || values.cols() < 2)
    throw std::invalid_argument("logit matrix needs n >= 1 and c >= 2");
  if (!values.allFinite()) throw std::invalid_argument("logit matrix has non-finite entries");
  return LogitMatrix(std::move(values));
}

MclloParams MclloParams::identity(int num_categories, int baseline) {
  MclloParams p;
  p.delta = Eigen::VectorXd::Ones(num_categories - 1);
  p.gamma = Eigen::VectorXd::Ones(num_categories - 1);
  p.baseline = baseline;
  p.validate();
  return p;
}

void MclloParams::validate() const {
  if (delta.size() < 1 || delta.size() != gamma.size())
    throw std::invalid_argument("delta and gamma must have equal length c-1 >= 1");
  if (baseline < 0 || baseline >= num_categories())
    throw std::invalid_argument("baseline index out of range");
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    if (!(delta[j] > 0.0) || !std::isfinite(delta[j]))
      throw std::invalid_argument("delta must be strictly positive and finite");
    if (!std::isfinite(gamma[j])) throw std::invalid_argument("gamma must be finite");
  }
}

}  // namespace calikit
