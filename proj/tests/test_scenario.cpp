#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include "retrodiction/scenario.hpp"

namespace {

using namespace retrodiction;
using namespace retrodiction::cli;

const std::filesystem::path kScenarios = RETRODICTION_SCENARIO_DIR;

json bb84_doc(json params = json::object()) {
  return json{{"schema_version", 1}, {"kind", "bb84"}, {"parameters", std::move(params)}};
}

json bus_train_doc(json conditional) {
  return json{{"schema_version", 1},
              {"kind", "bayes"},
              {"parameters",
               {{"events", {"bus", "train"}},
                {"priors", {0.5, 0.5}},
                {"outcomes", {"late", "on_time"}},
                {"conditional", std::move(conditional)}}}};
}

template <typename E>
std::string message_of(const json& doc) {
  try {
    run(doc);
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected exception";
  return {};
}

TEST(Scenario, Kinds) {
  const auto& k = scenario_kinds();
  for (const char* name : {"bayes", "retrodict", "detector", "synthesis", "scissors", "bb84"}) {
    EXPECT_NE(std::find(k.begin(), k.end(), name), k.end()) << name;
  }
}

TEST(Scenario, ExitCodes) {
  EXPECT_EQ(exit_code_for(ParseError("x")), 2);
  EXPECT_EQ(exit_code_for(ValidationError("x")), 3);
  EXPECT_EQ(exit_code_for(DimensionError("x")), 3);
  EXPECT_EQ(exit_code_for(BiasedSourceError("x")), 3);
  EXPECT_EQ(exit_code_for(ZeroProbabilityError("x")), 4);
  EXPECT_EQ(exit_code_for(NumericIntegrityError("x")), 4);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
  EXPECT_EQ(error_report(ZeroProbabilityError("m"))["error"]["kind"], "computation");
}

TEST(Scenario, Bb84WithoutParametersEmitsBothTables) {
  const json doc{{"schema_version", 1}, {"kind", "bb84"}};
  const auto out = run(doc);
  const auto& pred = out.table("predictive");
  const auto& retro = out.table("retrodictive");
  const double row_l[] = {0.5, 0.0, 0.25, 0.25};
  const double row_v[] = {0.25, 0.25, 0.5, 0.0};
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(pred.values[0][j], row_l[j], 1e-12);
    EXPECT_NEAR(retro.values[2][j], row_v[j], 1e-12);
  }
  EXPECT_EQ(retro.row_labels[2], "V");
  EXPECT_FALSE(out.values().contains("simulation"));
}

TEST(Scenario, DetectorDiagonalAndTailBound) {
  const json doc{{"schema_version", 1},
                 {"kind", "detector"},
                 {"parameters", {{"n", 1}, {"eta", 0.5}, {"N", 40}}}};
  const auto j = run(doc).to_json();
  const auto& diag = j["outputs"]["values"]["retrodictive_diagonal"];
  ASSERT_EQ(diag.size(), 41u);
  for (std::size_t k = 0; k <= 40; ++k) {
    const double expected = k == 0 ? 0.0 : 0.25 * k * std::pow(0.5, static_cast<double>(k) - 1);
    EXPECT_NEAR(diag[k].get<double>(), expected, 1e-15);
  }
  const double bound = j["diagnostics"]["tail_bound"].get<double>();
  EXPECT_GT(bound, 0.0);
  EXPECT_LE(std::abs(j["outputs"]["values"]["trace"].get<double>() - 1.0), bound * (1 + 1e-9));
  EXPECT_EQ(j["outputs"]["operators"]["retrodictive_state"]["dims"], json::array({41}));
}

TEST(Scenario, MalformedRowIsValidationErrorNamingRow) {
  const auto msg = message_of<ValidationError>(bus_train_doc({{0.3, 0.7}, {0.1, 0.8}}));
  EXPECT_NE(msg.find("'train'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("0.9"), std::string::npos) << msg;
}

TEST(Scenario, UnknownFieldsRejected) {
  json top = bb84_doc();
  top["colour"] = "red";
  EXPECT_NE(message_of<ValidationError>(top).find("'colour'"), std::string::npos);

  EXPECT_NE(message_of<ValidationError>(bb84_doc({{"slots", 3}, {"speed", 1}})).find("'speed'"),
            std::string::npos);

  json nested{{"schema_version", 1},
              {"kind", "retrodict"},
              {"parameters",
               {{"dims", {2}},
                {"ensemble", {{{"label", "a"}, {"prior", 1.0}, {"state", {{"ket", {{1, 0}, {0, 0}}}, {"phase", 0}}}}}},
                {"pom", {{{"label", "b"}, {"element", {{"matrix", {{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}}}}}}}}}}};
  EXPECT_NE(message_of<ValidationError>(nested).find("'phase'"), std::string::npos);
}

TEST(Scenario, EnvelopeValidation) {
  EXPECT_THROW(run(json{{"kind", "bb84"}}), ValidationError);
  EXPECT_THROW(run(json{{"schema_version", 2}, {"kind", "bb84"}}), ValidationError);
  EXPECT_THROW(run(json{{"schema_version", 1}, {"kind", "tarot"}}), ValidationError);
  EXPECT_THROW(run(json::array()), ValidationError);
  EXPECT_THROW(parse_document("{not json"), ParseError);
  EXPECT_THROW(run_file(kScenarios / "does-not-exist.json"), ParseError);
}

TEST(Scenario, Bb84ParameterRules) {
  EXPECT_THROW(run(bb84_doc({{"seed", 3}})), ValidationError);
  EXPECT_THROW(run(bb84_doc({{"slots", 0}})), ValidationError);
  EXPECT_THROW(run(bb84_doc({{"slots", -1}})), ValidationError);
  EXPECT_THROW(run(bb84_doc({{"slots", 10}, {"attack", "mitm"}})), ValidationError);
  const auto j = run(bb84_doc({{"slots", 10}, {"emit_slots", true}})).to_json();
  EXPECT_EQ(j["outputs"]["values"]["slots"].size(), 10u);
  EXPECT_EQ(j["outputs"]["values"]["simulation"]["seed"], 1);
}

TEST(Scenario, ZeroProbabilityObservationIsComputationError) {
  const json doc{{"schema_version", 1},
                 {"kind", "bayes"},
                 {"parameters",
                  {{"events", {"a", "b"}},
                   {"priors", {0.5, 0.5}},
                   {"outcomes", {"x", "never"}},
                   {"conditional", {{1.0, 0.0}, {1.0, 0.0}}},
                   {"observed", "never"}}}};
  EXPECT_THROW(run(doc), ZeroProbabilityError);
  // Without the observation the impossible outcome is listed, not fatal.
  json quiet = doc;
  quiet["parameters"].erase("observed");
  const auto j = run(quiet).to_json();
  EXPECT_EQ(j["diagnostics"]["impossible_outcomes"], json::array({"never"}));
  EXPECT_EQ(j["outputs"]["tables"]["retrodictive"]["row_labels"], json::array({"x"}));
}

TEST(Scenario, DeterministicJson) {
  for (const char* name : {"bb84-simulation.json", "scissors-eq41.json", "bb84-retrodict-quantum.json"}) {
    const std::string a = run_file(kScenarios / name).render(OutputFormat::json);
    const std::string b = run_file(kScenarios / name).render(OutputFormat::json);
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Scenario, ComplexSerializationAndPrecision) {
  const auto j = run_file(kScenarios / "synthesis-single-photon.json").to_json();
  const auto& m = j["outputs"]["operators"]["retrodictive_state"]["matrix"];
  ASSERT_TRUE(m.is_array());
  ASSERT_TRUE(m[0][0].is_array());
  EXPECT_EQ(m[0][0].size(), 2u);

  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::strtod(format_double(third).c_str(), nullptr), third);
  const std::string dumped = json(third).dump();
  EXPECT_EQ(std::strtod(dumped.c_str(), nullptr), third);
}

TEST(Scenario, CsvHasOnlyTables) {
  const std::string csv = run_file(kScenarios / "bus-train.json").render(OutputFormat::csv);
  EXPECT_EQ(csv.rfind("# prior (distribution)\n,bus,train\np,0.5,0.5\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("# retrodictive (conditional)\n,bus,train\nlate,0.74999999999999989"),
            std::string::npos)
      << csv;
  const std::string scissors = run_file(kScenarios / "scissors-eq41.json").render(OutputFormat::csv);
  EXPECT_TRUE(scissors.empty());
}

TEST(Scenario, BusTrainPosterior) {
  const auto out = run_file(kScenarios / "bus-train.json");
  EXPECT_NEAR(out.table("posterior").values[0][0], 0.75, 1e-15);
  EXPECT_NEAR(out.table("marginal").values[0][0], 0.2, 1e-15);
  EXPECT_NEAR(out.table("joint").values[0][0], 0.15, 1e-15);
}

TEST(Scenario, HorseRaces) {
  const auto ten = run_file(kScenarios / "horse-race.json");
  for (double p : ten.table("marginal").values[0]) EXPECT_NEAR(p, 0.1, 1e-15);
  const auto nine = run_file(kScenarios / "horse-race-scratched.json");
  for (double p : nine.table("marginal").values[0]) EXPECT_NEAR(p, 1.0 / 9.0, 1e-15);
}

TEST(Scenario, QuantumBb84MatchesClassical) {
  const auto q = run_file(kScenarios / "bb84-retrodict-quantum.json");
  const auto c = run_file(kScenarios / "bb84-bayes-classical.json");
  const double post_v[] = {0.25, 0.25, 0.5, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(q.table("posterior").values[0][i], post_v[i], 1e-12);
    EXPECT_NEAR(c.table("posterior").values[0][i], post_v[i], 1e-12);
  }
  EXPECT_EQ(q.values()["source"], "unbiased");
  EXPECT_LE(q.diagnostics()["classical_oracle_max_deviation"].get<double>(), 1e-12);
  EXPECT_NEAR(q.values()["outcome_prior_trace_over_d"]["V"].get<double>(), 0.25, 1e-15);
}

TEST(Scenario, BiasedSources) {
  const auto sharp = run_file(kScenarios / "biased-qubit.json");
  EXPECT_EQ(sharp.values()["source"], "biased");
  EXPECT_NEAR(sharp.table("posterior").values[0][0], 1.0, 1e-15);
  const auto blind = run_file(kScenarios / "biased-qubit-blind.json");
  EXPECT_NEAR(blind.table("posterior").values[0][0], 0.9, 1e-15);
  EXPECT_NEAR(blind.table("posterior").values[0][1], 0.1, 1e-15);
}

TEST(Scenario, SubsetPrediction) {
  const auto out = run_file(kScenarios / "subset-prediction.json");
  const auto& t = out.table("predictive_subset");
  EXPECT_EQ(t.column_labels, (std::vector<std::string>{"zero", "one"}));
  EXPECT_NEAR(t.values[0][0], 0.5, 1e-15);
  EXPECT_NEAR(t.values[0][1], 0.5, 1e-15);
}

TEST(Scenario, ScissorsFidelity) {
  const auto out = run_file(kScenarios / "scissors-eq41.json");
  EXPECT_GE(out.values()["fidelity"].get<double>(), 1.0 - 1e-10);
  const auto& ket = out.values()["output_ket"];
  EXPECT_NEAR(ket[0][0].get<double>(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(ket[1][0].get<double>(), std::sqrt(0.5), 1e-12);
}

TEST(Catalog, ContentsAndCoverage) {
  const auto entries = list_examples(kScenarios);
  EXPECT_GE(entries.size(), 8u);
  auto has = [&](const std::string& n) {
    return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.name == n; });
  };
  for (const char* n : {"bb84-tables", "bus-train", "scissors-eq41"}) EXPECT_TRUE(has(n)) << n;
  std::set<std::string> kinds;
  for (const auto& e : entries) kinds.insert(e.kind);
  for (const auto& k : scenario_kinds()) EXPECT_TRUE(kinds.count(k)) << k;
  EXPECT_TRUE(std::is_sorted(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.name < b.name; }));
  EXPECT_THROW(list_examples(kScenarios / "missing"), ParseError);
}

TEST(Catalog, EveryEntryRuns) {
  for (const auto& e : list_examples(kScenarios)) {
    EXPECT_NO_THROW({
      const auto out = run_file(e.path);
      out.render(OutputFormat::json);
      out.render(OutputFormat::csv);
    }) << e.name;
  }
}

TEST(ResultDocument, RowCheckBeforeEmission) {
  ResultDocument doc(json::object(), "test");
  doc.add_table(Table{"bad", Table::Kind::conditional, {"r"}, {"a", "b"}, {{0.5, 0.4}}});
  EXPECT_THROW(doc.to_json(), ComputationError);
  EXPECT_THROW(doc.to_csv(), ComputationError);
}

}  // namespace
