// Source-loss attacks: faking the committer's distance, and exploiting
// multi-photon pulses of a Poissonian source.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qbc/protocol.hpp"
#include "qbc/strategy.hpp"

namespace qbc {

/// Weak coherent source feeding a lossy fibre and a detector.
struct SourceModel {
  double mu = 0.2;          // mean photons per pulse
  double alpha = 0.2;       // fibre attenuation, dB/km
  double length_km = 0.0;   // fibre length
  double eta = 1.0;         // detector efficiency
  std::int64_t pulses = 0;  // N_P

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("SourceModel: mu must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("SourceModel: alpha must be positive");
    if (!(length_km >= 0.0)) throw std::invalid_argument("SourceModel: length must be non-negative");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("SourceModel: eta must lie in (0, 1]");
    if (pulses < 0) throw std::invalid_argument("SourceModel: pulse count must be non-negative");
  }

  double transmittance() const { return std::pow(10.0, -alpha * length_km / 10.0); }
  double emitted() const { return mu * static_cast<double>(pulses); }
  double received() const { return transmittance() * emitted(); }
  /// Outcomes recorded by an honest party at the far end of the fibre.
  double measured_honest() const { return eta * received(); }
  /// Outcomes recorded by a cheater sitting at the source.
  double measured_cheater() const { return eta * emitted(); }
};

/// Claimed-location noise r_d against the cheater's own noise r_n.
struct DistanceScenario {
  double r_distant = 0.0;
  double r_near = 0.0;

  DistanceScenario() = default;
  DistanceScenario(double rd, double rn) : r_distant(rd), r_near(rn) {
    if (!(rn >= 0.0 && rn <= rd && rd <= 1.0)) {
      throw std::invalid_argument("DistanceScenario: need 0 <= r_near <= r_distant <= 1");
    }
  }
};

inline double poisson_pmf(std::int64_t n, double mu) {
  if (n < 0) throw std::invalid_argument("poisson_pmf: negative count");
  if (!(mu > 0.0)) throw std::invalid_argument("poisson_pmf: mu must be positive");
  return std::exp(static_cast<double>(n) * std::log(mu) - mu - std::lgamma(static_cast<double>(n) + 1.0));
}

/// Probability of two or more photons in a pulse.
inline double multi_photon_mass(double mu) { return -std::expm1(-mu) - mu * std::exp(-mu); }

/// Distance beyond which an honest party detects at most half of what a
/// cheater at the source detects.
inline double max_safe_distance(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("max_safe_distance: alpha must be positive");
  return 10.0 / alpha * std::log10(2.0);
}

/// Noisy safe distance, or nullopt when r_d >= (r_n + 1)/2 and the cheater
/// can always fake her location.
inline std::optional<double> max_safe_distance_noisy(double alpha, DistanceScenario s) {
  if (!(alpha > 0.0)) throw std::invalid_argument("max_safe_distance_noisy: alpha must be positive");
  // ratio >= 1 rearranged as 2 r_d - r_n >= 1; the slack absorbs decimal
  // inputs that sit on the boundary, where the log diverges anyway.
  if (2.0 * s.r_distant - s.r_near >= 1.0 - 1e-12) return std::nullopt;
  const double ratio = (s.r_distant - s.r_near) / (1.0 - s.r_distant);
  return 10.0 / alpha * (std::log10(2.0) + std::log10(1.0 - ratio));
}

/// Random-guess padding relative to the cheater's good results, Delta N /
/// (N_cM / 2), needed to match an honest count at distance `length_km`.
/// Zero at max_safe_distance(alpha), negative beyond it.
inline double padding_ratio(double alpha, double length_km) {
  if (!(alpha > 0.0)) throw std::invalid_argument("padding_ratio: alpha must be positive");
  return 1.0 - std::pow(10.0, alpha * length_km / 10.0) / 2.0;
}

/// Statistics of a cheater near the source who reports good results measured
/// at noise r_n mixed with unbiased coin flips.
inline ConditionalTable faked_table(Variant v, Commitment claimed, DistanceScenario s, double length_km,
                                    double alpha) {
  if (!(length_km >= 0.0)) throw std::invalid_argument("faked_table: length must be non-negative");
  const double pad = padding_ratio(alpha, length_km);
  if (pad < 0.0) {
    throw std::invalid_argument("faked_table: length exceeds the noiseless safe distance; no padding is needed");
  }
  const double w = pad / (1.0 + pad);
  const ConditionalTable good = honest_table(v, claimed, Noise(s.r_near));
  return ConditionalTable::from_p0(sent_states(v), [&](SentState st) {
    return (1.0 - w) * good.p(st, 0) + w * 0.5;
  });
}

/// Fraction of |0>/|+> particles identified with certainty by unambiguous
/// state discrimination.
inline double usd_success_rate() { return 1.0 - std::numbers::sqrt2 / 2.0; }

enum class MultiPhotonMode { Ideal, BeamSplitter };

/// Weight of random results in the beam-splitter attack.
inline double beam_splitter_weight(double mu) { return 0.5 * mu * std::exp(-mu) / -std::expm1(-mu); }

/// Reported statistics for the two multi-photon strategies, conditioned on
/// a non-empty pulse. Ideal: single photons go through Breidbart plus
/// flips, multi-photon pulses are resolved exactly. BeamSplitter: `f` is
/// ignored; honest results where the right observable was measured and coin
/// flips otherwise.
inline ConditionalTable multiphoton_table(Variant v, Commitment claimed, Noise n, double mu, FlipParams f,
                                          MultiPhotonMode mode) {
  if (!(mu > 0.0)) throw std::invalid_argument("multiphoton_table: mu must be positive");
  const ConditionalTable honest = honest_table(v, claimed, n);
  if (mode == MultiPhotonMode::BeamSplitter) {
    const double w = beam_splitter_weight(mu);
    return ConditionalTable::from_p0(sent_states(v), [&](SentState s) {
      return (1.0 - w) * honest.p(s, 0) + w * 0.5;
    });
  }
  const ConditionalTable single = cheat_table(v, n, f);
  const double non_empty = -std::expm1(-mu);
  const double p_single = mu * std::exp(-mu) / non_empty;
  const double p_multi = multi_photon_mass(mu) / non_empty;
  return ConditionalTable::from_p0(sent_states(v), [&](SentState s) {
    return p_single * single.p(s, 0) + p_multi * honest.p(s, 0);
  });
}

inline double log_multiphoton_success(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state,
                                      double sigma_factor, double mu, FlipParams f, MultiPhotonMode mode) {
  return log_pass_probability(build_test(v, claimed, n, n_per_state, sigma_factor),
                              multiphoton_table(v, claimed, n, mu, f, mode));
}

inline double multiphoton_success(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state,
                                  double sigma_factor, double mu, FlipParams f, MultiPhotonMode mode) {
  return std::exp(log_multiphoton_success(v, claimed, n, n_per_state, sigma_factor, mu, f, mode));
}

}  // namespace qbc
