#pragma once

// Predictive and retrodictive quantum states and conditional probabilities.
//
// A measurement is a POM {Pi_j}. A preparation is an ensemble of events a_i,
// each with prior P(a_i) and predictive state rho_i. The retrodictive state
// assigned to outcome b_j is the normalized POM element Pi_j / Tr(Pi_j);
// combined with the preparation POM Xi_i = D P(a_i) rho_i of an unbiased
// source it reproduces the Bayes posterior P(a_i | b_j) = Tr(rho_j^retr Xi_i).
// Biased sources go through Lambda_i = P(a_i) rho_i instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retrodiction/bayes.hpp"
#include "retrodiction/errors.hpp"
#include "retrodiction/hilbert.hpp"

namespace retrodiction {

struct LabeledOperator {
  std::string label;
  Operator op;
};

namespace detail {

inline void require_unique_labels(const std::vector<LabeledOperator>& items, const char* what) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (items[i].label == items[j].label) {
        throw ValidationError(std::string("duplicate ") + what + " label '" + items[i].label + "'");
      }
    }
  }
}

inline const Operator& find_labeled(const std::vector<LabeledOperator>& items,
                                    const std::string& label, const char* what) {
  for (const auto& item : items) {
    if (item.label == label) return item.op;
  }
  throw ValidationError(std::string("unknown ") + what + " label '" + label + "'");
}

inline ModeDims common_dims(const std::vector<LabeledOperator>& items, const char* what) {
  if (items.empty()) {
    throw ValidationError(std::string(what) + " must have at least one element");
  }
  const ModeDims& dims = items.front().op.dims();
  for (const auto& item : items) {
    if (!(item.op.dims() == dims)) {
      throw DimensionError(std::string(what) + " element '" + item.label + "' has dims " +
                           item.op.dims().to_string() + ", expected " + dims.to_string());
    }
  }
  return dims;
}

inline Operator sum_of(const std::vector<LabeledOperator>& items, const ModeDims& dims) {
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(dims.total()),
                            static_cast<Eigen::Index>(dims.total()));
  for (const auto& item : items) acc += item.op.matrix();
  return Operator(dims, std::move(acc));
}

// Quantum probabilities summed over a complete POM are one only to within D
// times the elementwise completeness tolerance.
inline double probability_tolerance(const ModeDims& dims, double tol) {
  return std::max(bayes::kValidationTolerance, tol * static_cast<double>(dims.total()));
}

inline void require_psd(const LabeledOperator& item, const char* what, double tol) {
  if (!is_psd(item.op, tol)) {
    throw ValidationError(std::string(what) + " element '" + item.label +
                          "' is not positive semidefinite");
  }
}

}  // namespace detail

// Measurement POM: PSD elements summing to the identity.
class Pom {
 public:
  explicit Pom(std::vector<LabeledOperator> elements, double tol = kDefaultTolerance)
      : elements_(std::move(elements)), dims_(detail::common_dims(elements_, "POM")) {
    detail::require_unique_labels(elements_, "POM");
    for (const auto& e : elements_) detail::require_psd(e, "POM", tol);
    const double dev = max_abs_diff(detail::sum_of(elements_, dims_), identity(dims_));
    if (dev > tol) {
      throw ValidationError("POM elements do not sum to the identity (max deviation " +
                            std::to_string(dev) + ")");
    }
  }

  const std::vector<LabeledOperator>& elements() const noexcept { return elements_; }
  const ModeDims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const Operator& element(const std::string& label) const {
    return detail::find_labeled(elements_, label, "POM");
  }
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& e : elements_) out.push_back(e.label);
    return out;
  }

 private:
  std::vector<LabeledOperator> elements_;
  ModeDims dims_;
};

struct PreparationEvent {
  std::string label;
  double prior;
  Operator state;
};

// Preparation events with priors and predictive density operators.
class PreparationEnsemble {
 public:
  explicit PreparationEnsemble(std::vector<PreparationEvent> events, double tol = kDefaultTolerance)
      : events_(std::move(events)), dims_(validate(events_, tol)) {}

  const std::vector<PreparationEvent>& events() const noexcept { return events_; }
  const ModeDims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return events_.size(); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& e : events_) out.push_back(e.label);
    return out;
  }
  std::vector<double> priors() const {
    std::vector<double> out;
    for (const auto& e : events_) out.push_back(e.prior);
    return out;
  }

  // sum_i P(a_i) rho_i
  Operator mixture() const {
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(dims_.total()),
                              static_cast<Eigen::Index>(dims_.total()));
    for (const auto& e : events_) acc += e.prior * e.state.matrix();
    return Operator(dims_, std::move(acc));
  }

 private:
  static ModeDims validate(const std::vector<PreparationEvent>& events, double tol) {
    if (events.empty()) {
      throw ValidationError("preparation ensemble must have at least one event");
    }
    const ModeDims dims = events.front().state.dims();
    double total = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      for (std::size_t j = i + 1; j < events.size(); ++j) {
        if (events[j].label == e.label) {
          throw ValidationError("duplicate preparation label '" + e.label + "'");
        }
      }
      if (!(e.state.dims() == dims)) {
        throw DimensionError("preparation '" + e.label + "' has dims " + e.state.dims().to_string() +
                             ", expected " + dims.to_string());
      }
      if (!std::isfinite(e.prior) || e.prior < 0.0) {
        throw ValidationError("preparation '" + e.label + "' has a negative prior");
      }
      if (!is_psd(e.state, tol)) {
        throw ValidationError("predictive state of '" + e.label + "' is not positive semidefinite");
      }
      if (std::abs(trace(e.state) - 1.0) > tol) {
        throw ValidationError("predictive state of '" + e.label + "' does not have unit trace");
      }
      total += e.prior;
    }
    if (std::abs(total - 1.0) > tol) {
      throw ValidationError("preparation priors sum to " + std::to_string(total) + ", expected 1");
    }
    return dims;
  }

  std::vector<PreparationEvent> events_;
  ModeDims dims_;
};

// Preparation POM of an unbiased source: Xi_i = D P(a_i) rho_i, summing to 1.
class PreparationPom {
 public:
  explicit PreparationPom(std::vector<LabeledOperator> elements, double tol = kDefaultTolerance)
      : elements_(std::move(elements)), dims_(detail::common_dims(elements_, "preparation POM")) {
    detail::require_unique_labels(elements_, "preparation POM");
    for (const auto& e : elements_) detail::require_psd(e, "preparation POM", tol);
    const double dev = max_abs_diff(detail::sum_of(elements_, dims_), identity(dims_));
    if (dev > tol) {
      throw ValidationError("preparation POM elements do not sum to the identity (max deviation " +
                            std::to_string(dev) + ")");
    }
  }

  const std::vector<LabeledOperator>& elements() const noexcept { return elements_; }
  const ModeDims& dims() const noexcept { return dims_; }
  const Operator& element(const std::string& label) const {
    return detail::find_labeled(elements_, label, "preparation");
  }

 private:
  std::vector<LabeledOperator> elements_;
  ModeDims dims_;
};

// Lambda_i = P_B(a_i) rho_i for a possibly biased source. Traces are the
// priors, so they sum to one.
class BiasedElements {
 public:
  explicit BiasedElements(std::vector<LabeledOperator> elements, double tol = kDefaultTolerance)
      : elements_(std::move(elements)), dims_(detail::common_dims(elements_, "biased source")) {
    detail::require_unique_labels(elements_, "biased source");
    double total = 0.0;
    for (const auto& e : elements_) {
      detail::require_psd(e, "biased source", tol);
      total += std::real(trace(e.op));
    }
    if (std::abs(total - 1.0) > tol) {
      throw ValidationError("biased source element traces sum to " + std::to_string(total) +
                            ", expected 1");
    }
  }

  static BiasedElements from_ensemble(const PreparationEnsemble& ens) {
    std::vector<LabeledOperator> out;
    for (const auto& e : ens.events()) out.push_back({e.label, scale(e.state, e.prior)});
    return BiasedElements(std::move(out));
  }

  const std::vector<LabeledOperator>& elements() const noexcept { return elements_; }
  const ModeDims& dims() const noexcept { return dims_; }
  const Operator& element(const std::string& label) const {
    return detail::find_labeled(elements_, label, "preparation");
  }

 private:
  std::vector<LabeledOperator> elements_;
  ModeDims dims_;
};

// Tr(rho Pi), checked to lie in [-tol, 1 + tol] and clamped to [0, 1].
inline double born_probability(const Operator& state, const Operator& element,
                               double tol = kDefaultTolerance) {
  if (!(state.dims() == element.dims())) {
    throw DimensionError("born_probability: state dims " + state.dims().to_string() +
                         " vs element dims " + element.dims().to_string());
  }
  const Complex p = (state.matrix().cwiseProduct(element.matrix().transpose())).sum();
  if (std::abs(p.imag()) > tol || p.real() < -tol || p.real() > 1.0 + tol) {
    throw NumericIntegrityError("probability " + std::to_string(p.real()) + "+" +
                                std::to_string(p.imag()) + "i is outside [0, 1]");
  }
  return std::clamp(p.real(), 0.0, 1.0);
}

// Largest elementwise deviation of the prior-weighted mixture from 1/D.
inline double unbiased_deviation(const PreparationEnsemble& ens) {
  const double d = static_cast<double>(ens.dims().total());
  return max_abs_diff(ens.mixture(), scale(identity(ens.dims()), 1.0 / d));
}

inline bool is_unbiased(const PreparationEnsemble& ens, double tol = kDefaultTolerance) {
  return unbiased_deviation(ens) <= tol;
}

inline PreparationPom preparation_pom(const PreparationEnsemble& ens,
                                      double tol = kDefaultTolerance) {
  const double dev = unbiased_deviation(ens);
  if (dev > tol) {
    throw BiasedSourceError("source is biased (mixture deviates from 1/D by " +
                            std::to_string(dev) +
                            "); use the biased-source pathway instead of a preparation POM");
  }
  const double d = static_cast<double>(ens.dims().total());
  std::vector<LabeledOperator> out;
  for (const auto& e : ens.events()) out.push_back({e.label, scale(e.state, d * e.prior)});
  return PreparationPom(std::move(out), tol);
}

// Deviation of sum_i Lambda_i from (1/D) sum_i Tr(Lambda_i) 1. Zero for an
// unbiased source.
inline double bias_deviation(const BiasedElements& lam) {
  const auto& dims = lam.dims();
  const Operator total = detail::sum_of(lam.elements(), dims);
  const double d = static_cast<double>(dims.total());
  return max_abs_diff(total, scale(identity(dims), std::real(trace(total)) / d));
}

// Pi / Tr(Pi)
inline Operator retro_state(const Operator& element, double tol = kDefaultTolerance) {
  if (!is_psd(element, tol)) {
    throw ValidationError("retro_state: POM element is not positive semidefinite");
  }
  const double tr = std::real(trace(element));
  if (tr <= tol) {
    throw ZeroProbabilityError("retro_state: POM element has zero trace; the outcome never occurs");
  }
  return scale(element, 1.0 / tr);
}

// A priori outcome probability for an unbiased source, Tr(Pi) / D.
inline double outcome_prior(const Operator& element) {
  return std::real(trace(element)) / static_cast<double>(element.dim());
}

inline double retro_conditional_unbiased(const PreparationPom& prep, const Operator& element,
                                         const std::string& event, double tol = kDefaultTolerance) {
  return born_probability(retro_state(element, tol), prep.element(event), tol);
}

inline bayes::Distribution retro_posterior_unbiased(const PreparationPom& prep,
                                                    const Operator& element,
                                                    double tol = kDefaultTolerance) {
  const Operator rho = retro_state(element, tol);
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (const auto& xi : prep.elements()) {
    labels.push_back(xi.label);
    probs.push_back(born_probability(rho, xi.op, tol));
  }
  return bayes::Distribution(std::move(labels), std::move(probs),
                             detail::probability_tolerance(prep.dims(), tol));
}

// Posterior for a biased source written in the retrodictive picture:
// Tr(rho^retr Lambda_i) / sum_k Tr(rho^retr Lambda_k).
inline bayes::Distribution retro_posterior_biased(const BiasedElements& lam,
                                                  const Operator& element,
                                                  double tol = kDefaultTolerance) {
  const Operator rho = retro_state(element, tol);
  std::vector<std::string> labels;
  std::vector<double> weights;
  double denom = 0.0;
  for (const auto& l : lam.elements()) {
    const double w = born_probability(rho, l.op, tol);
    labels.push_back(l.label);
    weights.push_back(w);
    denom += w;
  }
  if (denom <= tol) {
    throw ZeroProbabilityError(
        "retro_conditional_biased: outcome has zero probability for this source");
  }
  for (auto& w : weights) w /= denom;
  return bayes::Distribution(std::move(labels), std::move(weights));
}

inline double retro_conditional_biased(const BiasedElements& lam, const Operator& element,
                                       const std::string& event, double tol = kDefaultTolerance) {
  const auto post = retro_posterior_biased(lam, element, tol);
  return post.at(event);
}

// Predictive probability restricted to a subset of outcomes:
// Tr(rho Pi_j) / sum_{l in subset} Tr(rho Pi_l).
inline double predictive_conditional_subset(const Operator& state, const Pom& pom,
                                            const std::vector<std::string>& subset,
                                            const std::string& outcome,
                                            double tol = kDefaultTolerance) {
  if (std::find(subset.begin(), subset.end(), outcome) == subset.end()) {
    throw ValidationError("outcome '" + outcome + "' is not in the selected subset");
  }
  double denom = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      if (subset[i] == subset[j]) {
        throw ValidationError("duplicate label '" + subset[i] + "' in outcome subset");
      }
    }
    denom += born_probability(state, pom.element(subset[i]), tol);
  }
  if (denom <= tol) {
    throw ZeroProbabilityError("selected outcome subset has zero probability");
  }
  return born_probability(state, pom.element(outcome), tol) / denom;
}

// P(b_j | a_i) = Tr(rho_i Pi_j) as a classical table (rows a_i, columns b_j).
inline bayes::ConditionalTable predictive_table(const PreparationEnsemble& ens, const Pom& pom,
                                                double tol = kDefaultTolerance) {
  if (!(ens.dims() == pom.dims())) {
    throw DimensionError("ensemble dims " + ens.dims().to_string() + " vs POM dims " +
                         pom.dims().to_string());
  }
  std::vector<std::vector<double>> rows;
  for (const auto& e : ens.events()) {
    std::vector<double> row;
    for (const auto& p : pom.elements()) row.push_back(born_probability(e.state, p.op, tol));
    rows.push_back(std::move(row));
  }
  return bayes::ConditionalTable(ens.labels(), pom.labels(), std::move(rows),
                                 detail::probability_tolerance(ens.dims(), tol));
}

}  // namespace retrodiction
