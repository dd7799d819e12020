#pragma once

// Scenario files: one JSON document describing a computation, validated
// strictly (unknown fields are rejected) and turned into a ResultDocument of
// probability tables, operators and scalar values.
//
// Complex numbers are [re, im] pairs; matrices are row-major nested lists.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "retrodiction/bayes.hpp"
#include "retrodiction/bb84.hpp"
#include "retrodiction/errors.hpp"
#include "retrodiction/hilbert.hpp"
#include "retrodiction/optics.hpp"
#include "retrodiction/retrodict.hpp"

namespace retrodiction::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Document is not valid JSON or cannot be read.
class ParseError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { json, csv };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const ComputationError*>(&e)) return 4;
  return 1;
}

inline std::string error_kind_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const ComputationError*>(&e)) return "computation";
  return "internal";
}

// ---------------------------------------------------------------------------
// Input decoding

namespace detail {

inline std::string type_name(const json& j) { return j.type_name(); }

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ValidationError(path + ": expected a number, got " + type_name(j));
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": number is not finite");
  return v;
}

inline std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ValidationError(path + ": expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path + ": expected a boolean");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path + ": expected a string, got " + type_name(j));
  return j.get<std::string>();
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array, got " + type_name(j));
  return j;
}

inline Complex as_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError(path + ": expected a complex number as [re, im]");
  }
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]")};
}

inline std::vector<std::string> as_strings(const json& j, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<double> as_doubles(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<Complex> as_complexes(const json& j, const std::string& path) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    out.push_back(as_complex(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Tracks which keys were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ValidationError(path_ + ": expected an object, got " + type_name(j_));
    }
  }

  const json& required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(path_ + ": missing required field '" + key + "'");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ValidationError(path_ + ": unknown field '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// {"ket": [...], "weight": w} -> w |psi><psi|, or {"matrix": [[...]]}.
inline Operator as_operator(const json& j, const ModeDims& dims, const std::string& path) {
  ObjectReader r(j, path);
  const json* ket = r.optional("ket");
  const json* mat = r.optional("matrix");
  const json* weight = r.optional("weight");
  r.finish();
  const auto n = static_cast<Eigen::Index>(dims.total());
  if ((ket != nullptr) == (mat != nullptr)) {
    throw ValidationError(path + ": give exactly one of 'ket' or 'matrix'");
  }
  if (ket) {
    const auto amps = as_complexes(*ket, path + ".ket");
    if (static_cast<Eigen::Index>(amps.size()) != n) {
      throw DimensionError(path + ".ket: has " + std::to_string(amps.size()) +
                           " amplitudes, expected " + std::to_string(n));
    }
    Ket psi(n);
    for (Eigen::Index i = 0; i < n; ++i) psi(i) = amps[static_cast<std::size_t>(i)];
    const double w = weight ? as_double(*weight, path + ".weight") : 1.0;
    return Operator(dims, w * (psi * psi.adjoint()));
  }
  if (weight) throw ValidationError(path + ": 'weight' only applies to 'ket'");
  const json& rows = as_array(*mat, path + ".matrix");
  if (static_cast<Eigen::Index>(rows.size()) != n) {
    throw DimensionError(path + ".matrix: has " + std::to_string(rows.size()) + " rows, expected " +
                         std::to_string(n));
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string rp = path + ".matrix[" + std::to_string(i) + "]";
    const auto row = as_complexes(rows[static_cast<std::size_t>(i)], rp);
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionError(rp + ": has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(n));
    }
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return Operator(dims, std::move(m));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Output document

struct Table {
  enum class Kind { conditional, joint, distribution };

  std::string name;
  Kind kind;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<double>> values;

  static Table conditional(std::string name, const bayes::ConditionalTable& t) {
    return {std::move(name), Kind::conditional, t.row_labels(), t.column_labels(), t.values()};
  }
  static Table joint(std::string name, const bayes::JointTable& t) {
    return {std::move(name), Kind::joint, t.row_labels, t.column_labels, t.values};
  }
  static Table distribution(std::string name, const bayes::Distribution& d) {
    return {std::move(name), Kind::distribution, {"p"}, d.labels(), {d.probabilities()}};
  }
};

inline std::string kind_name(Table::Kind k) {
  switch (k) {
    case Table::Kind::conditional: return "conditional";
    case Table::Kind::joint: return "joint";
    case Table::Kind::distribution: return "distribution";
  }
  return "conditional";
}

struct NamedOperator {
  std::string name;
  Operator op;
};

inline json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline json ket_json(const Ket& k) {
  json out = json::array();
  for (Eigen::Index i = 0; i < k.size(); ++i) out.push_back(complex_json(k(i)));
  return out;
}

inline json operator_json(const Operator& op) {
  json rows = json::array();
  for (std::size_t i = 0; i < op.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < op.dim(); ++j) row.push_back(complex_json(op(i, j)));
    rows.push_back(std::move(row));
  }
  return json{{"dims", op.dims().dims()}, {"matrix", std::move(rows)}};
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ResultDocument {
 public:
  static constexpr double kRowTolerance = 1e-9;

  ResultDocument(json scenario, std::string kind) : scenario_(std::move(scenario)), kind_(std::move(kind)) {}

  void set_row_tolerance(double tol) { row_tol_ = std::max(kRowTolerance, tol); }
  double row_tolerance() const noexcept { return row_tol_; }

  void add_table(Table t) { tables_.push_back(std::move(t)); }
  void add_operator(std::string name, Operator op) { operators_.push_back({std::move(name), std::move(op)}); }
  json& values() { return values_; }
  json& diagnostics() { return diagnostics_; }

  const std::vector<Table>& tables() const { return tables_; }
  const std::vector<NamedOperator>& operators() const { return operators_; }
  const json& values() const { return values_; }
  const json& diagnostics() const { return diagnostics_; }

  const Table& table(const std::string& name) const {
    for (const auto& t : tables_) {
      if (t.name == name) return t;
    }
    throw ValidationError("no table named '" + name + "'");
  }

  // Every conditional/distribution row sums to one and every joint table
  // sums to one; checked before anything is emitted.
  void check_tables() const {
    for (const auto& t : tables_) {
      double grand = 0.0;
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        double s = 0.0;
        for (double v : t.values[i]) s += v;
        grand += s;
        if (t.kind != Table::Kind::joint && std::abs(s - 1.0) > row_tol_) {
          throw ComputationError("table '" + t.name + "' row '" + t.row_labels[i] + "' sums to " +
                                 format_double(s));
        }
      }
      if (t.kind == Table::Kind::joint && std::abs(grand - 1.0) > row_tol_) {
        throw ComputationError("joint table '" + t.name + "' sums to " + format_double(grand));
      }
    }
  }

  json to_json() const {
    check_tables();
    json tables = json::object();
    for (const auto& t : tables_) {
      tables[t.name] = json{{"kind", kind_name(t.kind)},
                            {"row_labels", t.row_labels},
                            {"column_labels", t.column_labels},
                            {"values", t.values}};
    }
    json ops = json::object();
    for (const auto& o : operators_) ops[o.name] = operator_json(o.op);
    return json{{"schema_version", kSchemaVersion},
                {"kind", kind_},
                {"scenario", scenario_},
                {"outputs", {{"tables", std::move(tables)}, {"operators", std::move(ops)}, {"values", values_}}},
                {"diagnostics", diagnostics_}};
  }

  // Probability tables only; operators have no flat representation.
  std::string to_csv() const {
    check_tables();
    std::ostringstream os;
    bool first = true;
    for (const auto& t : tables_) {
      if (!first) os << '\n';
      first = false;
      os << "# " << t.name << " (" << kind_name(t.kind) << ")\n";
      for (const auto& c : t.column_labels) os << ',' << c;
      os << '\n';
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        os << t.row_labels[i];
        for (double v : t.values[i]) os << ',' << format_double(v);
        os << '\n';
      }
    }
    return os.str();
  }

  std::string render(OutputFormat format) const {
    return format == OutputFormat::json ? to_json().dump(2) + "\n" : to_csv();
  }

 private:
  json scenario_;
  std::string kind_;
  std::vector<Table> tables_;
  std::vector<NamedOperator> operators_;
  json values_ = json::object();
  json diagnostics_ = json::object();
  double row_tol_ = kRowTolerance;
};

// ---------------------------------------------------------------------------
// Scenario kinds

namespace detail {

inline ResultDocument run_bayes(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  const auto events = as_strings(r.required("events"), r.child("events"));
  const auto priors = as_doubles(r.required("priors"), r.child("priors"));
  const auto outcomes = as_strings(r.required("outcomes"), r.child("outcomes"));
  const json& cond_json = as_array(r.required("conditional"), r.child("conditional"));
  const json* observed = r.optional("observed");
  r.finish();

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cond_json.size(); ++i) {
    rows.push_back(as_doubles(cond_json[i], "parameters.conditional[" + std::to_string(i) + "]"));
  }
  const bayes::EventSpace space(events, priors);
  const bayes::ConditionalTable cond(events, outcomes, std::move(rows));

  ResultDocument out(doc, "bayes");
  out.add_table(Table::distribution("prior", space));
  out.add_table(Table::conditional("predictive", cond));
  const auto joint = bayes::joint(space, cond);
  out.add_table(Table::joint("joint", joint));
  out.add_table(Table::distribution("marginal", bayes::predict_marginal(space, cond)));

  const auto marginal = bayes::marginal_values(space, cond);
  std::vector<std::string> possible;
  std::vector<std::vector<double>> retro_rows;
  json impossible = json::array();
  double consistency = 0.0;
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    if (marginal[j] <= bayes::kZeroProbability) {
      impossible.push_back(outcomes[j]);
      continue;
    }
    const auto post = bayes::retrodict_conditional(space, cond, outcomes[j]);
    for (std::size_t i = 0; i < events.size(); ++i) {
      consistency = std::max(consistency, std::abs(post[i] * marginal[j] - joint(i, j)));
    }
    possible.push_back(outcomes[j]);
    retro_rows.push_back(post.probabilities());
  }
  if (!possible.empty()) {
    out.add_table(Table::conditional(
        "retrodictive", bayes::ConditionalTable(possible, events, std::move(retro_rows))));
  }
  if (observed) {
    const auto label = as_string(*observed, "parameters.observed");
    out.add_table(Table::distribution("posterior", bayes::retrodict_conditional(space, cond, label)));
  }
  out.diagnostics()["impossible_outcomes"] = impossible;
  out.diagnostics()["bayes_consistency_max_deviation"] = consistency;
  out.diagnostics()["validation_tolerance"] = bayes::kValidationTolerance;
  return out;
}

inline ResultDocument run_retrodict(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  std::vector<std::size_t> dim_list;
  const json& dims_json = as_array(r.required("dims"), r.child("dims"));
  for (std::size_t i = 0; i < dims_json.size(); ++i) {
    dim_list.push_back(as_count(dims_json[i], "parameters.dims[" + std::to_string(i) + "]"));
  }
  const ModeDims dims(dim_list);
  const json& ens_json = as_array(r.required("ensemble"), r.child("ensemble"));
  const json& pom_json = as_array(r.required("pom"), r.child("pom"));
  const json* observed = r.optional("observed");
  const json* subset = r.optional("prediction_subset");
  const json* tol_json = r.optional("tolerance");
  r.finish();
  const double tol = tol_json ? as_double(*tol_json, "parameters.tolerance") : kDefaultTolerance;
  if (tol <= 0.0) throw ValidationError("parameters.tolerance must be positive");

  std::vector<PreparationEvent> events;
  for (std::size_t i = 0; i < ens_json.size(); ++i) {
    const std::string path = "parameters.ensemble[" + std::to_string(i) + "]";
    ObjectReader er(ens_json[i], path);
    auto label = as_string(er.required("label"), path + ".label");
    const double prior = as_double(er.required("prior"), path + ".prior");
    Operator state = as_operator(er.required("state"), dims, path + ".state");
    er.finish();
    events.push_back({std::move(label), prior, std::move(state)});
  }
  std::vector<LabeledOperator> elements;
  for (std::size_t i = 0; i < pom_json.size(); ++i) {
    const std::string path = "parameters.pom[" + std::to_string(i) + "]";
    ObjectReader pr(pom_json[i], path);
    auto label = as_string(pr.required("label"), path + ".label");
    Operator element = as_operator(pr.required("element"), dims, path + ".element");
    pr.finish();
    elements.push_back({std::move(label), std::move(element)});
  }
  const PreparationEnsemble ens(std::move(events), tol);
  const Pom pom(std::move(elements), tol);

  ResultDocument out(doc, "retrodict");
  const double table_tol = retrodiction::detail::probability_tolerance(dims, tol);
  out.set_row_tolerance(table_tol);
  const auto prior = bayes::EventSpace(ens.labels(), ens.priors(), tol);
  const auto predictive = predictive_table(ens, pom, tol);
  out.add_table(Table::distribution("prior", prior));
  out.add_table(Table::conditional("predictive", predictive));
  const auto marginal = bayes::marginal_values(prior, predictive);
  out.add_table(Table::distribution("marginal", bayes::Distribution(pom.labels(), marginal, table_tol)));

  const bool unbiased = is_unbiased(ens, tol);
  const BiasedElements lam = BiasedElements::from_ensemble(ens);
  std::optional<PreparationPom> prep;
  if (unbiased) {
    prep = preparation_pom(ens, tol);
    for (const auto& xi : prep->elements()) out.add_operator("preparation_pom/" + xi.label, xi.op);
  }

  // The outcome posterior, through the pathway that matches the source.
  auto posterior = [&](const std::string& label) {
    const Operator& element = pom.element(label);
    return unbiased ? retro_posterior_unbiased(*prep, element, tol)
                    : retro_posterior_biased(lam, element, tol);
  };

  std::vector<std::string> possible;
  std::vector<std::vector<double>> rows;
  json impossible = json::array();
  double oracle_dev = 0.0;
  for (std::size_t j = 0; j < pom.size(); ++j) {
    const auto& e = pom.elements()[j];
    if (marginal[j] <= tol) {
      impossible.push_back(e.label);
      continue;
    }
    const auto post = posterior(e.label);
    const auto classical = bayes::retrodict_conditional(prior, predictive, e.label);
    for (std::size_t i = 0; i < post.size(); ++i) {
      oracle_dev = std::max(oracle_dev, std::abs(post[i] - classical[i]));
    }
    possible.push_back(e.label);
    rows.push_back(post.probabilities());
    out.add_operator("retrodictive_state/" + e.label, retro_state(e.op, tol));
  }
  if (!possible.empty()) {
    out.add_table(Table::conditional(
        "retrodictive", bayes::ConditionalTable(possible, ens.labels(), std::move(rows), table_tol)));
  }
  if (observed) {
    const auto label = as_string(*observed, "parameters.observed");
    const std::size_t j = bayes::detail::index_of(pom.labels(), label, "outcome");
    if (marginal[j] <= tol) {
      throw ZeroProbabilityError("observed outcome '" + label +
                                 "' has zero probability; the posterior is undefined");
    }
    out.add_table(Table::distribution("posterior", posterior(label)));
  }
  if (subset) {
    const auto labels = as_strings(*subset, "parameters.prediction_subset");
    std::vector<std::vector<double>> sub_rows;
    for (const auto& ev : ens.events()) {
      std::vector<double> row;
      for (const auto& b : labels) row.push_back(predictive_conditional_subset(ev.state, pom, labels, b, tol));
      sub_rows.push_back(std::move(row));
    }
    out.add_table(Table::conditional("predictive_subset",
                                     bayes::ConditionalTable(ens.labels(), labels, std::move(sub_rows))));
  }

  json outcome_priors = json::object();
  for (const auto& e : pom.elements()) outcome_priors[e.label] = outcome_prior(e.op);
  out.values()["source"] = unbiased ? "unbiased" : "biased";
  out.values()["dimension"] = dims.total();
  if (unbiased) out.values()["outcome_prior_trace_over_d"] = outcome_priors;
  out.diagnostics()["pathway"] = unbiased ? "preparation_pom" : "biased_elements";
  out.diagnostics()["unbiased_deviation"] = unbiased_deviation(ens);
  out.diagnostics()["bias_deviation"] = bias_deviation(lam);
  out.diagnostics()["classical_oracle_max_deviation"] = oracle_dev;
  out.diagnostics()["impossible_outcomes"] = impossible;
  out.diagnostics()["tolerance"] = tol;
  return out;
}

inline ResultDocument run_detector(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  const std::size_t n = as_count(r.required("n"), r.child("n"));
  const double eta = as_double(r.required("eta"), r.child("eta"));
  const std::size_t N = as_count(r.required("N"), r.child("N"));
  r.finish();
  const optics::FockSpace space(N);
  const Operator closed = optics::inefficient_detector_retro(n, eta, space);
  const auto bs = optics::BeamSplitter::from_efficiency(eta);
  const Operator pom = optics::compose_measurement_pom(space.fock_projector(0), space.fock_projector(n),
                                                       identity(space.single_mode()), bs, space);
  const Operator pipeline = retro_state(pom);

  json closed_diag = json::array();
  json pipeline_diag = json::array();
  double dev = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    closed_diag.push_back(closed(k, k).real());
    pipeline_diag.push_back(pipeline(k, k).real());
    dev = std::max(dev, std::abs(closed(k, k) - pipeline(k, k)));
  }
  ResultDocument out(doc, "detector");
  out.add_operator("retrodictive_state", closed);
  out.values()["theta"] = bs.theta();
  out.values()["efficiency"] = eta;
  out.values()["retrodictive_diagonal"] = std::move(closed_diag);
  out.values()["trace"] = std::real(trace(closed));
  out.values()["pipeline_diagonal"] = std::move(pipeline_diag);
  out.values()["pom_trace"] = std::real(trace(pom));
  out.diagnostics()["truncation"] = N;
  out.diagnostics()["tail_bound"] = optics::detector_tail_bound(n, eta, N);
  out.diagnostics()["closed_vs_pipeline_max_deviation"] = dev;
  return out;
}

inline optics::ReferenceState read_reference(ObjectReader& r) {
  return optics::ReferenceState(as_complexes(r.required("reference"), r.child("reference")));
}

inline std::size_t read_truncation(ObjectReader& r, std::size_t minimum) {
  const json* n = r.optional("N");
  return n ? as_count(*n, r.child("N")) : std::max<std::size_t>(minimum, 1);
}

inline ResultDocument run_synthesis(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  const auto ref = read_reference(r);
  const std::size_t n = as_count(r.required("n"), r.child("n"));
  const std::size_t m = as_count(r.required("m"), r.child("m"));
  const optics::BeamSplitter bs(as_double(r.required("theta"), r.child("theta")));
  const std::size_t N = read_truncation(r, std::max(n + m, ref.amplitudes().size() - 1));
  r.finish();
  const optics::FockSpace space(N);
  const Operator rho = optics::projection_synthesis_retro(ref, n, m, bs, space);

  ResultDocument out(doc, "synthesis");
  out.add_operator("retrodictive_state", rho);
  const double purity = std::real((rho.matrix() * rho.matrix()).trace());
  out.values()["purity"] = purity;
  if (std::abs(purity - 1.0) <= 1e-9) out.values()["retrodictive_ket"] = ket_json(dominant_ket(rho));
  out.diagnostics()["truncation"] = N;
  out.diagnostics()["max_photons_in_support"] = n + m;
  return out;
}

inline ResultDocument run_scissors(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  const auto ref = read_reference(r);
  const optics::BeamSplitter bs(as_double(r.required("theta"), r.child("theta")));
  const std::size_t N = read_truncation(r, ref.amplitudes().size() - 1);
  r.finish();
  const optics::FockSpace space(N);
  const Operator rho_b = optics::projection_synthesis_retro(ref, 1, 0, bs, space);
  const Operator rho_d = optics::scissors_output(ref, bs, space);

  // (c0 cos theta |0> + c1 sin theta |1>) / norm
  const auto& c = ref.amplitudes();
  const Complex c1 = c.size() > 1 ? c[1] : Complex(0.0);
  Ket expected = Ket::Zero(static_cast<Eigen::Index>(space.mode_dim()));
  expected(0) = c[0] * std::cos(bs.theta());
  expected(1) = c1 * std::sin(bs.theta());
  expected.normalize();

  ResultDocument out(doc, "scissors");
  out.add_operator("retrodictive_state_b", rho_b);
  out.add_operator("output_state_d", rho_d);
  out.values()["output_ket"] = ket_json(dominant_ket(rho_d));
  out.values()["closed_form_ket"] = ket_json(expected);
  out.values()["fidelity"] = fidelity(expected, rho_d);
  out.diagnostics()["truncation"] = N;
  return out;
}

inline ResultDocument run_bb84(const json& doc, const json& params) {
  ObjectReader r(params, "parameters");
  const json* slots_json = r.optional("slots");
  const json* seed_json = r.optional("seed");
  const json* attack_json = r.optional("attack");
  const json* emit_json = r.optional("emit_slots");
  r.finish();

  ResultDocument out(doc, "bb84");
  const auto pred = bb84::predictive_table();
  const auto retro = bb84::retrodictive_table();
  out.add_table(Table::conditional("predictive", pred));
  out.add_table(Table::conditional("retrodictive", retro));

  // Both factorizations of the joint with uniform 1/4 marginals.
  double consistency = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      consistency = std::max(consistency, std::abs(pred(a, b) * 0.25 - retro(b, a) * 0.25));
    }
  }
  out.diagnostics()["bayes_consistency_max_deviation"] = consistency;

  if (slots_json) {
    const std::size_t count = as_count(*slots_json, "parameters.slots");
    const std::uint64_t seed = seed_json ? as_count(*seed_json, "parameters.seed") : 1;
    const auto attack = attack_json ? bb84::attack_from_name(as_string(*attack_json, "parameters.attack"))
                                    : bb84::Attack::none;
    const bool emit = emit_json ? as_bool(*emit_json, "parameters.emit_slots") : false;
    const auto sim = bb84::simulate_slots(count, seed, attack);
    const auto& s = sim.summary;

    std::vector<std::string> seen;
    std::vector<std::vector<double>> rows;
    for (auto a : bb84::kPolarizations) {
      if (s.alice_count(a) == 0) continue;
      seen.emplace_back(bb84::name(a));
      std::vector<double> row;
      for (auto b : bb84::kPolarizations) row.push_back(s.frequency(a, b));
      rows.push_back(std::move(row));
    }
    out.add_table(Table::conditional("empirical_predictive",
                                     bayes::ConditionalTable(seen, bb84::labels(), std::move(rows))));
    out.values()["simulation"] = json{{"slots", s.slots},
                                      {"seed", seed},
                                      {"attack", bb84::name(attack)},
                                      {"same_basis", s.same_basis},
                                      {"same_basis_errors", s.same_basis_errors},
                                      {"same_basis_error_rate", s.same_basis_error_rate()},
                                      {"eavesdrop_flags", s.eavesdrop_flags}};
    if (emit) {
      json records = json::array();
      for (const auto& slot : sim.slots) {
        records.push_back(json{{"alice", bb84::name(slot.alice_choice())},
                               {"bob_basis", bb84::name(slot.bob_basis())},
                               {"bob_outcome", bb84::name(slot.bob_outcome())},
                               {"eavesdrop_flag", bb84::eavesdrop_flag(slot)}});
      }
      out.values()["slots"] = std::move(records);
    }
  } else if (seed_json || attack_json || emit_json) {
    throw ValidationError("parameters: 'seed', 'attack' and 'emit_slots' require 'slots'");
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"bayes", "retrodict", "detector",
                                              "synthesis", "scissors", "bb84"};
  return kinds;
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
}

// Validate the envelope and dispatch on "kind".
inline ResultDocument run(const json& doc) {
  detail::ObjectReader r(doc, "scenario");
  const json& version = r.required("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ValidationError("scenario.schema_version: unsupported version (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
  const std::string kind = detail::as_string(r.required("kind"), "scenario.kind");
  if (const json* n = r.optional("name")) detail::as_string(*n, "scenario.name");
  if (const json* d = r.optional("description")) detail::as_string(*d, "scenario.description");
  const json* params_ptr = r.optional("parameters");
  r.finish();
  const json params = params_ptr ? *params_ptr : json::object();

  if (kind == "bayes") return detail::run_bayes(doc, params);
  if (kind == "retrodict") return detail::run_retrodict(doc, params);
  if (kind == "detector") return detail::run_detector(doc, params);
  if (kind == "synthesis") return detail::run_synthesis(doc, params);
  if (kind == "scissors") return detail::run_scissors(doc, params);
  if (kind == "bb84") return detail::run_bb84(doc, params);
  throw ValidationError("scenario.kind: unknown kind '" + kind + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ResultDocument run_file(const std::filesystem::path& path) {
  return run(parse_document(read_text(path)));
}

inline json error_report(const std::exception& e) {
  return json{{"error", {{"kind", error_kind_for(e)}, {"exit_code", exit_code_for(e)}, {"message", e.what()}}}};
}

// ---------------------------------------------------------------------------
// Bundled scenario catalog

struct CatalogEntry {
  std::string name;
  std::string kind;
  std::string description;
  std::filesystem::path path;
};

// Every *.json directly inside dir that carries a schema_version, sorted by
// name.
inline std::vector<CatalogEntry> list_examples(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ParseError("scenario directory '" + dir.string() + "' does not exist");
  }
  std::vector<CatalogEntry> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const json doc = parse_document(read_text(entry.path()));
    if (!doc.is_object() || !doc.contains("schema_version")) continue;
    CatalogEntry e;
    e.name = doc.value("name", entry.path().stem().string());
    e.kind = doc.value("kind", "");
    e.description = doc.value("description", "");
    e.path = entry.path();
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

}  // namespace retrodiction::cli
