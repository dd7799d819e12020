#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "retrodiction/bayes.hpp"

namespace {

using namespace retrodiction;
using namespace retrodiction::bayes;

EventSpace bus_train_prior() { return EventSpace({"B", "T"}, {0.5, 0.5}); }

ConditionalTable bus_train_cond() {
  return ConditionalTable({"B", "T"}, {"late", "on_time"}, {{0.3, 0.7}, {0.1, 0.9}});
}

TEST(Joint, HorseRaceUniformPrior) {
  Labels horses;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) {
    horses.push_back("h" + std::to_string(i));
    std::vector<double> row(10, 0.0);
    row[static_cast<std::size_t>(i)] = 1.0;
    rows.push_back(row);
  }
  const auto prior = EventSpace::uniform(horses);
  const auto j = joint(prior, ConditionalTable(horses, horses, rows));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(j(i, i), 0.1);
  }
  EXPECT_NEAR(j.total(), 1.0, 1e-12);

  // One horse scratched: nine remain at 1/9.
  horses.pop_back();
  EXPECT_DOUBLE_EQ(EventSpace::uniform(horses)[0], 1.0 / 9.0);
}

TEST(Joint, DegeneratePrior) {
  const EventSpace prior({"only"}, {1.0});
  const ConditionalTable cond({"only"}, {"x", "y", "z"}, {{0.2, 0.5, 0.3}});
  const auto j = joint(prior, cond);
  EXPECT_EQ(j.values[0], cond.values()[0]);
}

TEST(Joint, BusTrain) {
  EXPECT_NEAR(joint(bus_train_prior(), bus_train_cond())(0, 0), 0.15, 1e-15);
}

TEST(PredictMarginal, BusTrain) {
  const auto m = predict_marginal(bus_train_prior(), bus_train_cond());
  EXPECT_NEAR(m.at("late"), 0.2, 1e-15);
  EXPECT_NEAR(m.at("on_time"), 0.8, 1e-15);
}

TEST(PredictMarginal, DeterministicPermutation) {
  const EventSpace prior({"a", "b", "c"}, {0.5, 0.3, 0.2});
  const ConditionalTable perm({"a", "b", "c"}, {"x", "y", "z"},
                              {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
  const auto m = predict_marginal(prior, perm);
  EXPECT_DOUBLE_EQ(m.at("z"), 0.5);
  EXPECT_DOUBLE_EQ(m.at("x"), 0.3);
  EXPECT_DOUBLE_EQ(m.at("y"), 0.2);
}

TEST(PredictMarginal, Bb84StyleColumns) {
  const Labels s{"L", "R", "V", "H"};
  const ConditionalTable cond(s, s,
                              {{0.5, 0.0, 0.25, 0.25},
                               {0.0, 0.5, 0.25, 0.25},
                               {0.25, 0.25, 0.5, 0.0},
                               {0.25, 0.25, 0.0, 0.5}});
  const auto m = predict_marginal(EventSpace::uniform(s), cond);
  for (double p : m.probabilities()) EXPECT_DOUBLE_EQ(p, 0.25);

  const auto post = retrodict_conditional(EventSpace::uniform(s), cond, "V");
  EXPECT_DOUBLE_EQ(post.at("L"), 0.25);
  EXPECT_DOUBLE_EQ(post.at("R"), 0.25);
  EXPECT_DOUBLE_EQ(post.at("V"), 0.5);
  EXPECT_DOUBLE_EQ(post.at("H"), 0.0);
}

TEST(RetrodictConditional, BusTrain) {
  const auto post = retrodict_conditional(bus_train_prior(), bus_train_cond(), "late");
  EXPECT_NEAR(post.at("B"), 0.75, 1e-15);
  EXPECT_NEAR(post.at("T"), 0.25, 1e-15);
}

TEST(RetrodictConditional, SymmetricTableGivesUniformPosterior) {
  const auto prior = EventSpace::uniform({"a", "b", "c"});
  const ConditionalTable cond({"a", "b", "c"}, {"x"}, {{1.0}, {1.0}, {1.0}});
  const auto post = retrodict_conditional(prior, cond, "x");
  for (double p : post.probabilities()) {
    EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  }
}

TEST(RetrodictConditional, ZeroProbabilityOutcomeIsAnError) {
  const ConditionalTable cond({"B", "T"}, {"late", "never"}, {{1.0, 0.0}, {1.0, 0.0}});
  EXPECT_THROW(retrodict_conditional(bus_train_prior(), cond, "never"), ZeroProbabilityError);
  EXPECT_THROW(retrodictive_table(bus_train_prior(), cond), ZeroProbabilityError);
}

TEST(Validation, MalformedInputs) {
  EXPECT_THROW(EventSpace({"a", "b"}, {0.5, 0.4}), ValidationError);
  EXPECT_THROW(EventSpace({"a", "a"}, {0.5, 0.5}), ValidationError);
  EXPECT_THROW(EventSpace({"a", "b"}, {1.5, -0.5}), ValidationError);
  try {
    ConditionalTable({"B", "T"}, {"x", "y"}, {{0.5, 0.5}, {0.5, 0.4}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'T'"), std::string::npos);
  }
  const EventSpace other({"X", "Y"}, {0.5, 0.5});
  EXPECT_THROW(joint(other, bus_train_cond()), ValidationError);
  EXPECT_THROW(retrodict_conditional(bus_train_prior(), bus_train_cond(), "nope"), ValidationError);
}

// Random tables: both factorizations of the joint agree, the marginal is
// normalized, and uniform priors reduce to the prior-free form.
TEST(Properties, RandomTables) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::uniform_int_distribution<std::size_t> size(1, 6);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t na = size(rng);
    const std::size_t nb = size(rng);
    Labels a, b;
    for (std::size_t i = 0; i < na; ++i) a.push_back("a" + std::to_string(i));
    for (std::size_t j = 0; j < nb; ++j) b.push_back("b" + std::to_string(j));
    std::vector<double> pri(na);
    double s = 0.0;
    for (auto& p : pri) s += (p = u(rng));
    for (auto& p : pri) p /= s;
    std::vector<std::vector<double>> rows(na, std::vector<double>(nb));
    for (auto& row : rows) {
      double rs = 0.0;
      for (auto& v : row) rs += (v = u(rng));
      for (auto& v : row) v /= rs;
    }
    const EventSpace prior(a, pri);
    const ConditionalTable cond(a, b, rows);
    const auto j = joint(prior, cond);
    const auto m = predict_marginal(prior, cond);
    double msum = 0.0;
    for (double p : m.probabilities()) msum += p;
    EXPECT_NEAR(msum, 1.0, 1e-12);
    for (std::size_t col = 0; col < nb; ++col) {
      const auto post = retrodict_conditional(prior, cond, b[col]);
      for (std::size_t row = 0; row < na; ++row) {
        EXPECT_NEAR(post[row] * m[col], j(row, col), 1e-12);
      }
      // Uniform prior: P(a|b) = P(b|a) / sum_k P(b|a_k).
      const auto upost = retrodict_conditional(EventSpace::uniform(a), cond, b[col]);
      double colsum = 0.0;
      for (std::size_t k = 0; k < na; ++k) colsum += cond(k, col);
      for (std::size_t row = 0; row < na; ++row) {
        EXPECT_NEAR(upost[row], cond(row, col) / colsum, 1e-12);
      }
    }
  }
}

}  // namespace
