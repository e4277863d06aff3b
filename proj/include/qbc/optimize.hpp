// Maximization of the cheating success over the flip probabilities.
//
// A full grid scan over [0,1]^2 locates the basin, then a compass search
// (axis and diagonal moves, step halving) refines it. The objective is
// compared in log space so that success probabilities as small as 1e-30
// still order correctly. Everything is deterministic for fixed inputs.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>

#include "qbc/attacks.hpp"
#include "qbc/strategy.hpp"

namespace qbc {

struct SinglePhoton {};
struct MultiPhotonIdeal {
  double mu = 0.2;
};
using Objective = std::variant<SinglePhoton, MultiPhotonIdeal>;

struct OptimizerOptions {
  double grid_step = 0.01;
  double resolution = 1e-6;  // final compass step
};

struct OptimizationResult {
  FlipParams best;
  double value = 0.0;
  std::int64_t evaluations = 0;
  double grid_step = 0.0;
};

/// Log of the selected objective at `f`.
inline double log_objective(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state, double sigma_factor,
                            const Objective& objective, FlipParams f) {
  return std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, SinglePhoton>) {
          return log_cheat_success(v, claimed, n, n_per_state, sigma_factor, f);
        } else {
          return log_multiphoton_success(v, claimed, n, n_per_state, sigma_factor, o.mu, f, MultiPhotonMode::Ideal);
        }
      },
      objective);
}

namespace detail {

// Candidate a beats incumbent b when its log value is larger by more than a
// relative 1e-12; ties go to the lexicographically smaller (p01, p10).
constexpr double kTie = 1e-12;

inline bool improves(double log_a, FlipParams a, double log_b, FlipParams b) {
  if (log_a > log_b + kTie) return true;
  if (log_a < log_b - kTie) return false;
  return a.p01 < b.p01 || (a.p01 == b.p01 && a.p10 < b.p10);
}

}  // namespace detail

inline OptimizationResult optimize(Variant v, Commitment claimed, Noise n, std::int64_t n_per_state,
                                   double sigma_factor, const Objective& objective, OptimizerOptions opts = {}) {
  if (n_per_state < 1) throw std::invalid_argument("optimize: need at least one particle per state");
  if (!(opts.grid_step > 0.0 && opts.grid_step <= 1.0)) {
    throw std::invalid_argument("optimize: grid step must lie in (0, 1]");
  }
  if (const auto* mp = std::get_if<MultiPhotonIdeal>(&objective); mp && !(mp->mu > 0.0)) {
    throw std::invalid_argument("optimize: mu must be positive");
  }

  // Windows do not depend on f; build the test once.
  const AcceptanceTest test = build_test(v, claimed, n, n_per_state, sigma_factor);
  std::int64_t evaluations = 0;
  auto eval = [&](FlipParams f) {
    ++evaluations;
    return std::visit(
        [&](const auto& o) -> double {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, SinglePhoton>) {
            return log_pass_probability(test, cheat_table(v, n, f));
          } else {
            return log_pass_probability(test, multiphoton_table(v, claimed, n, o.mu, f, MultiPhotonMode::Ideal));
          }
        },
        objective);
  };

  const auto cells = static_cast<std::int64_t>(std::ceil(1.0 / opts.grid_step - 1e-9));
  auto coord = [&](std::int64_t i) { return std::min(1.0, static_cast<double>(i) * opts.grid_step); };

  FlipParams best{0.0, 0.0};
  double best_log = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i <= cells; ++i) {
    for (std::int64_t j = 0; j <= cells; ++j) {
      const FlipParams f{coord(i), coord(j)};
      const double value = eval(f);
      if (detail::improves(value, f, best_log, best)) {
        best = f;
        best_log = value;
      }
    }
  }

  static constexpr std::array<std::array<double, 2>, 8> kMoves{{
      {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
  }};
  for (double step = opts.grid_step / 2.0; step >= opts.resolution; step /= 2.0) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& m : kMoves) {
        const FlipParams f{std::clamp(best.p01 + m[0] * step, 0.0, 1.0), std::clamp(best.p10 + m[1] * step, 0.0, 1.0)};
        if (f == best) continue;
        const double value = eval(f);
        // Must clear the tie band, so the walk cannot drift along a plateau.
        if (value > best_log + detail::kTie) {
          best = f;
          best_log = value;
          moved = true;
        }
      }
    }
  }

  return {best, std::exp(best_log), evaluations, opts.grid_step};
}

}  // namespace qbc
