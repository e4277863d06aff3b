// Breidbart-basis cheating with probabilistic post-processing of outcomes.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qbc/protocol.hpp"
#include "qbc/qcore.hpp"

namespace qbc {

/// Post-processing flip probabilities: a measured 0 is reported as 1 with
/// probability p01, a measured 1 as 0 with probability p10.
struct FlipParams {
  double p01 = 0.0;
  double p10 = 0.0;

  FlipParams() = default;
  FlipParams(double p01_, double p10_) : p01(p01_), p10(p10_) {
    if (!(p01 >= 0.0 && p01 <= 1.0 && p10 >= 0.0 && p10 <= 1.0)) {
      throw std::invalid_argument("FlipParams: probabilities must lie in [0, 1]");
    }
  }
  friend bool operator==(const FlipParams&, const FlipParams&) = default;
};

/// Raw statistics of a cheater measuring every particle in the Breidbart basis.
inline ConditionalTable breidbart_table(Variant v, Noise n) {
  const Basis basis = breidbart();
  return ConditionalTable::from_p0(sent_states(v), [&](SentState s) { return born(basis, prepare(s), n); });
}

/// Applies the 2x2 stochastic flip kernel row by row.
inline ConditionalTable apply_flips(const ConditionalTable& t, FlipParams f) {
  std::vector<ConditionalTable::Row> rows;
  rows.reserve(t.rows().size());
  for (const auto& row : t.rows()) {
    const double q0 = row.p[0] * (1.0 - f.p01) + row.p[1] * f.p10;
    const double q1 = row.p[1] * (1.0 - f.p10) + row.p[0] * f.p01;
    rows.push_back({row.state, {q0, q1}});
  }
  return ConditionalTable(std::move(rows));
}

inline ConditionalTable cheat_table(Variant v, Noise n, FlipParams f) {
  return apply_flips(breidbart_table(v, n), f);
}

inline double log_cheat_success(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state,
                                double sigma_factor, FlipParams f) {
  return log_pass_probability(build_test(v, claimed, n, n_per_state, sigma_factor), cheat_table(v, n, f));
}

/// Probability that the Breidbart-plus-flips strategy passes every test of
/// the claimed commitment. Windows always come from honest statistics.
inline double cheat_success(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state, double sigma_factor,
                            FlipParams f) {
  return pass_probability(build_test(v, claimed, n, n_per_state, sigma_factor), cheat_table(v, n, f));
}

}  // namespace qbc
