#pragma once

// Classical finite-event Bayes engine. Besides being a calculator in its own
// right, it is the oracle the quantum retrodiction pathways are checked
// against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "retrodiction/errors.hpp"

namespace retrodiction::bayes {

// Priors and conditional rows must sum to one within this. Tables derived
// from quantum probabilities pass a looser tolerance matching their inputs.
inline constexpr double kValidationTolerance = 1e-12;

// Marginals at or below this are treated as outcomes that cannot occur.
inline constexpr double kZeroProbability = 1e-15;

using Labels = std::vector<std::string>;

namespace detail {

inline std::size_t index_of(const Labels& labels, const std::string& label, const char* what) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw ValidationError(std::string("unknown ") + what + " label '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

inline void require_unique(const Labels& labels, const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) {
        throw ValidationError(std::string("duplicate ") + what + " label '" + labels[i] + "'");
      }
    }
  }
}

inline void require_distribution(const std::vector<double>& p, const std::string& name,
                                 double tol) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream os;
      os << name << " has a negative or non-finite entry (" << v << ")";
      throw ValidationError(os.str());
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << name << " sums to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
}

}  // namespace detail

// Labeled probability distribution; used for priors and posteriors alike.
class EventSpace {
 public:
  EventSpace(Labels labels, std::vector<double> priors, double tol = kValidationTolerance)
      : labels_(std::move(labels)), priors_(std::move(priors)) {
    if (labels_.empty()) {
      throw ValidationError("event space must contain at least one event");
    }
    if (labels_.size() != priors_.size()) {
      throw ValidationError("event space has " + std::to_string(labels_.size()) + " labels but " +
                            std::to_string(priors_.size()) + " probabilities");
    }
    detail::require_unique(labels_, "event");
    detail::require_distribution(priors_, "prior distribution", tol);
  }

  static EventSpace uniform(Labels labels) {
    const double p = labels.empty() ? 0.0 : 1.0 / static_cast<double>(labels.size());
    std::vector<double> priors(labels.size(), p);
    return EventSpace(std::move(labels), std::move(priors));
  }

  const Labels& labels() const noexcept { return labels_; }
  const std::vector<double>& probabilities() const noexcept { return priors_; }
  std::size_t size() const noexcept { return labels_.size(); }
  double operator[](std::size_t i) const { return priors_.at(i); }
  double at(const std::string& label) const { return priors_[index_of(label)]; }
  std::size_t index_of(const std::string& label) const {
    return detail::index_of(labels_, label, "event");
  }

 private:
  Labels labels_;
  std::vector<double> priors_;
};

using Distribution = EventSpace;

// P(column | row). Each row is validated as a distribution.
class ConditionalTable {
 public:
  ConditionalTable(Labels row_labels, Labels column_labels, std::vector<std::vector<double>> values,
                   double tol = kValidationTolerance)
      : rows_(std::move(row_labels)), cols_(std::move(column_labels)), values_(std::move(values)) {
    if (rows_.empty() || cols_.empty()) {
      throw ValidationError("conditional table needs at least one row and one column");
    }
    detail::require_unique(rows_, "row");
    detail::require_unique(cols_, "column");
    if (values_.size() != rows_.size()) {
      throw ValidationError("conditional table has " + std::to_string(values_.size()) +
                            " rows but " + std::to_string(rows_.size()) + " row labels");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (values_[i].size() != cols_.size()) {
        throw ValidationError("conditional row '" + rows_[i] + "' has " +
                              std::to_string(values_[i].size()) + " entries, expected " +
                              std::to_string(cols_.size()));
      }
      detail::require_distribution(values_[i], "conditional row '" + rows_[i] + "'", tol);
    }
  }

  const Labels& row_labels() const noexcept { return rows_; }
  const Labels& column_labels() const noexcept { return cols_; }
  const std::vector<std::vector<double>>& values() const noexcept { return values_; }
  double operator()(std::size_t row, std::size_t col) const { return values_.at(row).at(col); }
  double at(const std::string& row, const std::string& col) const {
    return values_[detail::index_of(rows_, row, "row")][detail::index_of(cols_, col, "column")];
  }

 private:
  Labels rows_;
  Labels cols_;
  std::vector<std::vector<double>> values_;
};

// P(a_i, b_j) with rows a_i and columns b_j.
struct JointTable {
  Labels row_labels;
  Labels column_labels;
  std::vector<std::vector<double>> values;

  double total() const {
    double s = 0.0;
    for (const auto& row : values) {
      for (double v : row) s += v;
    }
    return s;
  }
  double operator()(std::size_t row, std::size_t col) const { return values.at(row).at(col); }
};

namespace detail {

inline void require_matching(const EventSpace& priors, const ConditionalTable& cond) {
  if (priors.labels() != cond.row_labels()) {
    throw ValidationError("conditional table rows do not match the prior event labels");
  }
}

}  // namespace detail

inline JointTable joint(const EventSpace& priors, const ConditionalTable& cond) {
  detail::require_matching(priors, cond);
  JointTable out{priors.labels(), cond.column_labels(), {}};
  out.values.resize(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    out.values[i].resize(cond.column_labels().size());
    for (std::size_t j = 0; j < cond.column_labels().size(); ++j) {
      out.values[i][j] = cond(i, j) * priors[i];
    }
  }
  return out;
}

// P(b_j) = sum_i P(b_j | a_i) P(a_i). Returned unvalidated so that outcomes
// with zero probability can still be reported.
inline std::vector<double> marginal_values(const EventSpace& priors, const ConditionalTable& cond) {
  detail::require_matching(priors, cond);
  std::vector<double> out(cond.column_labels().size(), 0.0);
  for (std::size_t i = 0; i < priors.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] += cond(i, j) * priors[i];
    }
  }
  return out;
}

inline Distribution predict_marginal(const EventSpace& priors, const ConditionalTable& cond) {
  return Distribution(cond.column_labels(), marginal_values(priors, cond));
}

// Posterior over the conditioning events given an observed outcome.
inline Distribution retrodict_conditional(const EventSpace& priors, const ConditionalTable& cond,
                                          const std::string& outcome) {
  detail::require_matching(priors, cond);
  const std::size_t j = detail::index_of(cond.column_labels(), outcome, "outcome");
  double denom = 0.0;
  for (std::size_t k = 0; k < priors.size(); ++k) {
    denom += cond(k, j) * priors[k];
  }
  if (denom <= kZeroProbability) {
    throw ZeroProbabilityError("outcome '" + outcome +
                               "' has zero probability; the posterior is undefined");
  }
  std::vector<double> post(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    post[i] = cond(i, j) * priors[i] / denom;
  }
  return Distribution(priors.labels(), std::move(post));
}

// Full retrodictive table P(a_i | b_j), rows b_j. Every outcome must be
// possible.
inline ConditionalTable retrodictive_table(const EventSpace& priors, const ConditionalTable& cond) {
  std::vector<std::vector<double>> rows;
  rows.reserve(cond.column_labels().size());
  for (const auto& outcome : cond.column_labels()) {
    rows.push_back(retrodict_conditional(priors, cond, outcome).probabilities());
  }
  return ConditionalTable(cond.column_labels(), priors.labels(), std::move(rows));
}

}  // namespace retrodiction::bayes
