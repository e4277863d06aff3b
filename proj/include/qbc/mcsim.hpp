// Monte Carlo protocol runs: every trial samples the reported outcomes pulse
// by pulse and applies the verifier's windows. Used as an independent check
// of the closed-form acceptance probabilities.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "qbc/attacks.hpp"
#include "qbc/protocol.hpp"
#include "qbc/qcore.hpp"
#include "qbc/strategy.hpp"

namespace qbc::mc {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** keyed by (seed, stream). Each trial owns one stream, so
/// results do not depend on how trials are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    const std::uint64_t mixed = splitmix64(sm) ^ (stream * 0xD1B54A32D192ED03ULL);
    std::uint64_t key = mixed;
    for (auto& word : s_) word = splitmix64(key);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson draw by sequential inversion; intended for mu of order one.
  std::int64_t poisson(double mu) {
    const double u = uniform();
    double term = std::exp(-mu);
    double cdf = term;
    std::int64_t k = 0;
    while (u >= cdf && k < 10000) {
      ++k;
      term *= mu / static_cast<double>(k);
      cdf += term;
      if (term == 0.0) break;
    }
    return k;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4]{};
};

struct Honest {};
struct BreidbartFlips {
  FlipParams flips;
};
struct BeamSplitter {
  double mu = 0.2;
};
struct IdealMultiPhoton {
  double mu = 0.2;
  FlipParams flips;
};
struct FakedDistance {
  DistanceScenario scenario;
  double length_km = 0.0;
  double alpha = 0.2;
};
using StrategyDescriptor = std::variant<Honest, BreidbartFlips, BeamSplitter, IdealMultiPhoton, FakedDistance>;

/// Protocol context shared by every pulse of a run.
struct PulseContext {
  Variant variant = Variant::TwoState;
  Commitment claimed = Commitment::Zero;
  Noise noise;
};

/// Projective measurement of a depolarized state.
inline int measure(const Basis& b, SentState s, Noise n, Rng& rng) {
  return rng.bernoulli(born(b, prepare(s), n)) ? 0 : 1;
}

inline int flip(int outcome, FlipParams f, Rng& rng) {
  if (outcome == 0) return rng.bernoulli(f.p01) ? 1 : 0;
  return rng.bernoulli(f.p10) ? 0 : 1;
}

inline int coin(Rng& rng) { return rng.bernoulli(0.5) ? 0 : 1; }

/// Reported outcome for one pulse, or nullopt when the pulse carried no
/// photon.
inline std::optional<int> sample_pulse_outcome(const StrategyDescriptor& strategy, const PulseContext& ctx,
                                               SentState s, Rng& rng) {
  const Basis honest_basis = commitment_basis(ctx.claimed);
  return std::visit(
      [&](const auto& st) -> std::optional<int> {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Honest>) {
          return measure(honest_basis, s, ctx.noise, rng);
        } else if constexpr (std::is_same_v<T, BreidbartFlips>) {
          return flip(measure(breidbart(), s, ctx.noise, rng), st.flips, rng);
        } else if constexpr (std::is_same_v<T, BeamSplitter>) {
          const std::int64_t photons = rng.poisson(st.mu);
          if (photons == 0) return std::nullopt;
          if (photons >= 2) return measure(honest_basis, s, ctx.noise, rng);
          // A lone photon lands in one of the two observables at random.
          const bool claimed_arm = rng.bernoulli(0.5);
          if (claimed_arm) return measure(honest_basis, s, ctx.noise, rng);
          return coin(rng);
        } else if constexpr (std::is_same_v<T, IdealMultiPhoton>) {
          const std::int64_t photons = rng.poisson(st.mu);
          if (photons == 0) return std::nullopt;
          if (photons >= 2) return measure(honest_basis, s, ctx.noise, rng);
          return flip(measure(breidbart(), s, ctx.noise, rng), st.flips, rng);
        } else {
          const double pad = padding_ratio(st.alpha, st.length_km);
          if (pad < 0.0) throw std::invalid_argument("sample_pulse_outcome: length exceeds the safe distance");
          if (rng.bernoulli(pad / (1.0 + pad))) return coin(rng);
          return measure(honest_basis, s, Noise(st.scenario.r_near), rng);
        }
      },
      strategy);
}

struct TrialConfig {
  Variant variant = Variant::TwoState;
  Commitment claimed = Commitment::Zero;
  Noise noise;
  std::int64_t n_per_state = 50;
  double sigma_factor = 3.0;
  StrategyDescriptor strategy = Honest{};
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct TrialReport {
  struct Histogram {
    SentState state;
    std::vector<std::int64_t> counts;  // counts[k] = trials with k counted outcomes
  };
  double accept_rate = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
  std::vector<Histogram> histograms;

  friend bool operator==(const TrialReport& a, const TrialReport& b) {
    if (a.accept_rate != b.accept_rate || a.standard_error != b.standard_error || a.trials != b.trials ||
        a.histograms.size() != b.histograms.size())
      return false;
    for (std::size_t i = 0; i < a.histograms.size(); ++i) {
      if (a.histograms[i].state != b.histograms[i].state || a.histograms[i].counts != b.histograms[i].counts)
        return false;
    }
    return true;
  }
};

inline TrialReport run(const TrialConfig& c) {
  if (c.trials < 1) throw std::invalid_argument("mc::run: need at least one trial");
  const AcceptanceTest test = build_test(c.variant, c.claimed, c.noise, c.n_per_state, c.sigma_factor);
  const PulseContext ctx{c.variant, c.claimed, c.noise};
  const auto states = sent_states(c.variant);
  const auto n = static_cast<std::size_t>(c.n_per_state);

  struct Partial {
    std::int64_t accepted = 0;
    std::vector<std::vector<std::int64_t>> hist;
  };
  auto work = [&](std::int64_t begin, std::int64_t end, Partial& out) {
    out.hist.assign(states.size(), std::vector<std::int64_t>(n + 1, 0));
    for (std::int64_t t = begin; t < end; ++t) {
      Rng rng(c.seed, static_cast<std::uint64_t>(t));
      bool pass = true;
      for (std::size_t i = 0; i < states.size(); ++i) {
        const Window& w = test.window(states[i]);
        std::int64_t hits = 0;
        for (std::int64_t got = 0; got < c.n_per_state;) {
          const auto outcome = sample_pulse_outcome(c.strategy, ctx, states[i], rng);
          if (!outcome) continue;  // empty pulse: Bob sends another
          ++got;
          if (*outcome == w.counted_outcome) ++hits;
        }
        ++out.hist[i][static_cast<std::size_t>(hits)];
        pass = pass && hits >= w.lo && hits <= w.hi;
      }
      if (pass) ++out.accepted;
    }
  };

  unsigned threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, c.trials));
  std::vector<Partial> partials(threads);
  {
    std::vector<std::jthread> pool;
    const std::int64_t chunk = (c.trials + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
      const std::int64_t begin = std::min<std::int64_t>(c.trials, k * chunk);
      const std::int64_t end = std::min<std::int64_t>(c.trials, begin + chunk);
      pool.emplace_back(work, begin, end, std::ref(partials[k]));
    }
  }

  TrialReport report;
  report.trials = c.trials;
  std::int64_t accepted = 0;
  for (std::size_t i = 0; i < states.size(); ++i) report.histograms.push_back({states[i], std::vector<std::int64_t>(n + 1, 0)});
  for (const auto& p : partials) {
    accepted += p.accepted;
    for (std::size_t i = 0; i < states.size(); ++i)
      for (std::size_t k = 0; k <= n; ++k) report.histograms[i].counts[k] += p.hist[i][k];
  }
  const double rate = static_cast<double>(accepted) / static_cast<double>(c.trials);
  report.accept_rate = rate;
  report.standard_error = std::sqrt(rate * (1.0 - rate) / static_cast<double>(c.trials));
  return report;
}

/// Closed-form acceptance probability of the strategy a run simulates.
inline double analytic_accept(const TrialConfig& c) {
  const AcceptanceTest test = build_test(c.variant, c.claimed, c.noise, c.n_per_state, c.sigma_factor);
  const ConditionalTable table = std::visit(
      [&](const auto& st) -> ConditionalTable {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Honest>) {
          return honest_table(c.variant, c.claimed, c.noise);
        } else if constexpr (std::is_same_v<T, BreidbartFlips>) {
          return cheat_table(c.variant, c.noise, st.flips);
        } else if constexpr (std::is_same_v<T, BeamSplitter>) {
          return multiphoton_table(c.variant, c.claimed, c.noise, st.mu, {}, MultiPhotonMode::BeamSplitter);
        } else if constexpr (std::is_same_v<T, IdealMultiPhoton>) {
          return multiphoton_table(c.variant, c.claimed, c.noise, st.mu, st.flips, MultiPhotonMode::Ideal);
        } else {
          return faked_table(c.variant, c.claimed, st.scenario, st.length_km, st.alpha);
        }
      },
      c.strategy);
  return pass_probability(test, table);
}

}  // namespace qbc::mc
