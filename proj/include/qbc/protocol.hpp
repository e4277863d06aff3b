// Honest statistics of the two- and four-state commitment protocols and the
// verifier's binomial acceptance test.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "qbc/binomial.hpp"
#include "qbc/qcore.hpp"

namespace qbc {

enum class Variant { TwoState, FourState };

enum class Commitment { Zero = 0, One = 1 };

enum class SentState { Zero, One, Plus, Minus };

inline constexpr std::array<SentState, 2> kTwoStateSet{SentState::Zero, SentState::Plus};
inline constexpr std::array<SentState, 4> kFourStateSet{SentState::Zero, SentState::One, SentState::Plus,
                                                        SentState::Minus};

inline std::span<const SentState> sent_states(Variant v) {
  if (v == Variant::TwoState) return kTwoStateSet;
  return kFourStateSet;
}

inline std::size_t state_count(Variant v) { return sent_states(v).size(); }

inline Qubit prepare(SentState s) {
  switch (s) {
    case SentState::Zero: return states::zero();
    case SentState::One: return states::one();
    case SentState::Plus: return states::plus();
    case SentState::Minus: return states::minus();
  }
  throw std::logic_error("prepare: unknown state");
}

inline std::string_view label(SentState s) {
  switch (s) {
    case SentState::Zero: return "0";
    case SentState::One: return "1";
    case SentState::Plus: return "+";
    case SentState::Minus: return "-";
  }
  return "?";
}

inline std::string_view slug(SentState s) {
  switch (s) {
    case SentState::Zero: return "zero";
    case SentState::One: return "one";
    case SentState::Plus: return "plus";
    case SentState::Minus: return "minus";
  }
  return "unknown";
}

/// Observable measured by an honest committer. Committing to 0 measures in
/// the computational basis; committing to 1 measures in the diagonal basis
/// with |-> mapped to 0 and |+> mapped to 1.
inline Basis commitment_basis(Commitment c) {
  if (c == Commitment::Zero) return computational_basis();
  return hadamard_basis().swapped();
}

/// p(outcome | sent state) for every state of a variant.
class ConditionalTable {
 public:
  struct Row {
    SentState state;
    std::array<double, 2> p;  // indexed by outcome
  };

  ConditionalTable() = default;
  explicit ConditionalTable(std::vector<Row> rows) : rows_(std::move(rows)) {
    for (const auto& row : rows_) {
      if (row.p[0] < 0.0 || row.p[0] > 1.0 || row.p[1] < 0.0 || row.p[1] > 1.0 ||
          std::abs(row.p[0] + row.p[1] - 1.0) > kNormTolerance) {
        throw std::invalid_argument("ConditionalTable: row is not a probability distribution");
      }
    }
  }

  /// Builds a table from outcome-0 probabilities.
  template <typename F>
  static ConditionalTable from_p0(std::span<const SentState> states, F&& p0_of) {
    std::vector<Row> rows;
    rows.reserve(states.size());
    for (SentState s : states) {
      const double p0 = std::clamp(static_cast<double>(p0_of(s)), 0.0, 1.0);
      rows.push_back({s, {p0, 1.0 - p0}});
    }
    return ConditionalTable(std::move(rows));
  }

  const std::vector<Row>& rows() const { return rows_; }

  bool contains(SentState s) const {
    for (const auto& row : rows_)
      if (row.state == s) return true;
    return false;
  }

  double p(SentState s, int outcome) const {
    for (const auto& row : rows_)
      if (row.state == s) return row.p[static_cast<std::size_t>(outcome)];
    throw std::out_of_range("ConditionalTable: state not present");
  }

 private:
  std::vector<Row> rows_;
};

/// Honest committer's statistics. The two-state rows are the closed forms
/// 1 - r/2, r/2 and 1/2; all rows agree with the Born rule.
inline ConditionalTable honest_table(Variant v, Commitment c, Noise n) {
  const double r = n.r();
  if (v == Variant::TwoState) {
    return ConditionalTable::from_p0(sent_states(v), [&](SentState s) {
      if (c == Commitment::Zero) return s == SentState::Zero ? 1.0 - r / 2.0 : 0.5;
      return s == SentState::Zero ? 0.5 : r / 2.0;
    });
  }
  const Basis basis = commitment_basis(c);
  return ConditionalTable::from_p0(sent_states(v), [&](SentState s) { return born(basis, prepare(s), n); });
}

/// Integer acceptance interval [lo, hi] on the count of one outcome.
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  int counted_outcome = 0;
  friend bool operator==(const Window&, const Window&) = default;
};

struct AcceptanceTest {
  struct Entry {
    SentState state;
    Window window;
  };
  std::int64_t n_per_state = 0;
  double sigma_factor = 3.0;
  std::vector<Entry> entries;

  const Window& window(SentState s) const {
    for (const auto& e : entries)
      if (e.state == s) return e.window;
    throw std::out_of_range("AcceptanceTest: state not tested");
  }
};

/// Outcome whose count the verifier checks for `s` under claim `c`.
inline int counted_outcome(Variant v, Commitment c, SentState s) {
  if (v == Variant::TwoState) {
    return (c == Commitment::Zero && s == SentState::Zero) ? 0 : 1;
  }
  switch (s) {
    case SentState::Zero: return 0;
    case SentState::One: return 1;
    case SentState::Plus: return c == Commitment::Zero ? 0 : 1;
    case SentState::Minus: return 0;
  }
  return 0;
}

namespace detail {
// Snap values within a few ulps of an integer so that e.g. 15.0000000001
// does not ceil to 16.
inline double snap(double x) {
  const double nearest = std::round(x);
  return std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)) ? nearest : x;
}
}  // namespace detail

/// [ceil(mu - k sigma), floor(mu + k sigma)] clamped to [0, n] for the
/// count of an outcome with probability p.
inline Window binomial_window_bounds(std::int64_t n, double p, double k) {
  const double mu = static_cast<double>(n) * p;
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  const auto lo = static_cast<std::int64_t>(std::ceil(detail::snap(mu - k * sigma)));
  const auto hi = static_cast<std::int64_t>(std::floor(detail::snap(mu + k * sigma)));
  return {std::max<std::int64_t>(0, lo), std::min<std::int64_t>(n, hi), 0};
}

inline AcceptanceTest build_test(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state,
                                 double sigma_factor = 3.0) {
  if (n_per_state < 1) throw std::invalid_argument("build_test: need at least one particle per state");
  if (!(sigma_factor > 0.0)) throw std::invalid_argument("build_test: sigma factor must be positive");
  const ConditionalTable honest = honest_table(v, claimed, n);
  AcceptanceTest test{n_per_state, sigma_factor, {}};
  for (SentState s : sent_states(v)) {
    const int outcome = counted_outcome(v, claimed, s);
    Window w = binomial_window_bounds(n_per_state, honest.p(s, outcome), sigma_factor);
    w.counted_outcome = outcome;
    test.entries.push_back({s, w});
  }
  return test;
}

/// Per-state probability of landing inside that state's window.
inline double state_pass_probability(const AcceptanceTest& t, SentState s, const ConditionalTable& actual) {
  const Window& w = t.window(s);
  return binomial_window(t.n_per_state, actual.p(s, w.counted_outcome), w.lo, w.hi);
}

inline double log_pass_probability(const AcceptanceTest& t, const ConditionalTable& actual) {
  double total = 0.0;
  for (const auto& e : t.entries) {
    total += log_binomial_window(t.n_per_state, actual.p(e.state, e.window.counted_outcome), e.window.lo,
                                 e.window.hi);
  }
  return total;
}

/// Probability that statistics drawn from `actual` pass every window of `t`.
inline double pass_probability(const AcceptanceTest& t, const ConditionalTable& actual) {
  for (const auto& e : t.entries) {
    if (!actual.contains(e.state)) throw std::invalid_argument("pass_probability: table misses a tested state");
  }
  return std::exp(log_pass_probability(t, actual));
}

/// Probability that an honest committer to 1 passes the test for 0.
inline double binding_failure(Variant v, Noise n, std::int64_t n_per_state, double sigma_factor = 3.0) {
  return pass_probability(build_test(v, Commitment::Zero, n, n_per_state, sigma_factor),
                          honest_table(v, Commitment::One, n));
}

}  // namespace qbc
