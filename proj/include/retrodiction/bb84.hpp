#pragma once

// BB84 polarization example: Alice prepares one of L, R, V, H with equal
// probability, Bob measures circular or linear polarization at random.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "retrodiction/bayes.hpp"
#include "retrodiction/errors.hpp"
#include "retrodiction/hilbert.hpp"
#include "retrodiction/retrodict.hpp"

namespace retrodiction::bb84 {

// Table order follows the usual (L, R, V, H) listing.
enum class Polarization : std::uint8_t { L = 0, R = 1, V = 2, H = 3 };
enum class Basis : std::uint8_t { circular = 0, linear = 1 };

inline constexpr std::array<Polarization, 4> kPolarizations{Polarization::L, Polarization::R,
                                                            Polarization::V, Polarization::H};

inline constexpr std::size_t index(Polarization p) { return static_cast<std::size_t>(p); }

inline constexpr Basis basis_of(Polarization p) {
  return (p == Polarization::L || p == Polarization::R) ? Basis::circular : Basis::linear;
}

inline constexpr std::string_view name(Polarization p) {
  constexpr std::array<std::string_view, 4> names{"L", "R", "V", "H"};
  return names[index(p)];
}

inline constexpr std::string_view name(Basis b) {
  return b == Basis::circular ? "circular" : "linear";
}

inline Polarization polarization_from_name(std::string_view s) {
  for (auto p : kPolarizations) {
    if (name(p) == s) return p;
  }
  throw ValidationError("unknown polarization '" + std::string(s) + "'");
}

// The two states measured in a basis: circular -> (L, R), linear -> (V, H).
inline constexpr std::array<Polarization, 2> states_of(Basis b) {
  return b == Basis::circular ? std::array{Polarization::L, Polarization::R}
                              : std::array{Polarization::V, Polarization::H};
}

// Amplitudes in the (V, H) basis:
//   |L> = (|V> + i|H>)/sqrt2,  |R> = (|V> - i|H>)/sqrt2
inline Ket state(Polarization p) {
  const double s = std::numbers::sqrt2 / 2.0;
  Ket k(2);
  switch (p) {
    case Polarization::L: k << s, Complex(0.0, s); break;
    case Polarization::R: k << s, Complex(0.0, -s); break;
    case Polarization::V: k << 1.0, 0.0; break;
    case Polarization::H: k << 0.0, 1.0; break;
  }
  return k;
}

inline std::vector<std::string> labels() { return {"L", "R", "V", "H"}; }

// Alice's source: each state with prior 1/4.
inline PreparationEnsemble ensemble() {
  std::vector<PreparationEvent> events;
  for (auto p : kPolarizations) events.push_back({std::string(name(p)), 0.25, projector(state(p))});
  return PreparationEnsemble(std::move(events));
}

// Bob's measurement with the random basis choice folded in: 1/2 |s><s|.
inline Pom measurement_pom() {
  std::vector<LabeledOperator> elements;
  for (auto p : kPolarizations) {
    elements.push_back({std::string(name(p)), scale(projector(state(p)), 0.5)});
  }
  return Pom(std::move(elements));
}

// P(b_j | a_i) = P(basis of b_j measured) |<b_j|a_i>|^2, rows a_i.
inline bayes::ConditionalTable predictive_table() {
  std::vector<std::vector<double>> rows;
  for (auto a : kPolarizations) {
    std::vector<double> row;
    for (auto b : kPolarizations) row.push_back(0.5 * fidelity(state(b), state(a)));
    rows.push_back(std::move(row));
  }
  return bayes::ConditionalTable(labels(), labels(), std::move(rows));
}

// P(a_i | b_j) = P(basis of a_i prepared) |<a_i|b_j>^retr|^2, rows b_j.
inline bayes::ConditionalTable retrodictive_table() {
  std::vector<std::vector<double>> rows;
  for (auto b : kPolarizations) {
    std::vector<double> row;
    for (auto a : kPolarizations) row.push_back(0.5 * fidelity(state(a), state(b)));
    rows.push_back(std::move(row));
  }
  return bayes::ConditionalTable(labels(), labels(), std::move(rows));
}

class SlotRecord {
 public:
  SlotRecord(Polarization alice, Basis bob_basis, Polarization bob_outcome)
      : alice_(alice), basis_(bob_basis), outcome_(bob_outcome) {
    if (basis_of(bob_outcome) != bob_basis) {
      throw ValidationError("Bob's outcome " + std::string(name(bob_outcome)) +
                            " does not belong to the " + std::string(name(bob_basis)) + " basis");
    }
  }

  Polarization alice_choice() const noexcept { return alice_; }
  Basis bob_basis() const noexcept { return basis_; }
  Polarization bob_outcome() const noexcept { return outcome_; }
  bool same_basis() const noexcept { return basis_of(alice_) == basis_; }

  friend bool operator==(const SlotRecord&, const SlotRecord&) = default;

 private:
  Polarization alice_;
  Basis basis_;
  Polarization outcome_;
};

// Alice's predictive state orthogonal to Bob's retrodictive state: an
// outcome that cannot happen on an undisturbed channel.
inline bool eavesdrop_flag(const SlotRecord& slot, double tol = kDefaultTolerance) {
  return fidelity(state(slot.alice_choice()), state(slot.bob_outcome())) < tol;
}

enum class Attack : std::uint8_t { none, intercept_resend };

inline std::string_view name(Attack a) { return a == Attack::none ? "none" : "intercept_resend"; }

inline Attack attack_from_name(std::string_view s) {
  if (s == "none") return Attack::none;
  if (s == "intercept_resend") return Attack::intercept_resend;
  throw ValidationError("unknown attack mode '" + std::string(s) + "'");
}

struct SimulationSummary {
  std::size_t slots = 0;
  // counts[alice][bob_outcome]
  std::array<std::array<std::size_t, 4>, 4> counts{};
  std::size_t same_basis = 0;
  std::size_t same_basis_errors = 0;
  std::size_t eavesdrop_flags = 0;

  std::size_t alice_count(Polarization a) const {
    std::size_t n = 0;
    for (auto c : counts[index(a)]) n += c;
    return n;
  }

  // Empirical P(b | a); zero when a never occurred.
  double frequency(Polarization a, Polarization b) const {
    const std::size_t n = alice_count(a);
    return n == 0 ? 0.0 : static_cast<double>(counts[index(a)][index(b)]) / static_cast<double>(n);
  }

  double same_basis_error_rate() const {
    return same_basis == 0 ? 0.0
                           : static_cast<double>(same_basis_errors) / static_cast<double>(same_basis);
  }
};

struct SimulationResult {
  std::vector<SlotRecord> slots;
  SimulationSummary summary;
};

namespace detail {

// Draws are built from raw 64-bit engine output rather than std
// distributions, whose algorithms vary between standard libraries.
class SlotRng {
 public:
  explicit SlotRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool coin() { return (engine_() >> 63) != 0; }
  Polarization polarization() { return kPolarizations[engine_() >> 62]; }

 private:
  std::mt19937_64 engine_;
};

inline Polarization measure(Polarization incoming, Basis basis, SlotRng& rng) {
  const auto outcomes = states_of(basis);
  const double p_first = fidelity(state(outcomes[0]), state(incoming));
  return rng.uniform() < p_first ? outcomes[0] : outcomes[1];
}

inline Basis random_basis(SlotRng& rng) { return rng.coin() ? Basis::linear : Basis::circular; }

}  // namespace detail

// Monte-Carlo run of `count` time slots. With intercept_resend, Eve measures
// each photon in a random basis and forwards the state she found.
inline SimulationResult simulate_slots(std::size_t count, std::uint64_t seed,
                                       Attack attack = Attack::none) {
  if (count < 1) {
    throw ValidationError("slot count must be at least 1");
  }
  detail::SlotRng rng(seed);
  SimulationResult result;
  result.slots.reserve(count);
  auto& sum = result.summary;
  sum.slots = count;
  for (std::size_t i = 0; i < count; ++i) {
    const Polarization alice = rng.polarization();
    Polarization in_flight = alice;
    if (attack == Attack::intercept_resend) {
      in_flight = detail::measure(alice, detail::random_basis(rng), rng);
    }
    const Basis basis = detail::random_basis(rng);
    const Polarization outcome = detail::measure(in_flight, basis, rng);
    const SlotRecord& slot = result.slots.emplace_back(alice, basis, outcome);

    ++sum.counts[index(alice)][index(outcome)];
    if (slot.same_basis()) {
      ++sum.same_basis;
      if (outcome != alice) ++sum.same_basis_errors;
    }
    if (eavesdrop_flag(slot)) ++sum.eavesdrop_flags;
  }
  return result;
}

}  // namespace retrodiction::bb84
