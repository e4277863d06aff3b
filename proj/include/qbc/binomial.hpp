#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qbc {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// log P(lo <= X <= hi) for X ~ Binomial(n, p). Returns -inf for an empty or
/// impossible window. Terms are formed with lgamma so n can reach 1e5 and
/// beyond without overflow.
inline double log_binomial_window(std::int64_t n, double p, std::int64_t lo, std::int64_t hi) {
  if (n < 0) throw std::invalid_argument("log_binomial_window: negative trial count");
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min<std::int64_t>(hi, n);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (lo > hi) return kNegInf;

  // Degenerate success probabilities put all mass on one end.
  if (p <= 0.0) return lo == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return hi == n ? 0.0 : kNegInf;

  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(hi - lo + 1));
  double peak = kNegInf;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double t = log_choose(n, k) + static_cast<double>(k) * lp + static_cast<double>(n - k) * lq;
    terms.push_back(t);
    peak = std::max(peak, t);
  }
  CompensatedSum acc;
  for (double t : terms) acc.add(std::exp(t - peak));
  return peak + std::log(acc.value());
}

inline double binomial_window(std::int64_t n, double p, std::int64_t lo, std::int64_t hi) {
  return std::exp(log_binomial_window(n, p, lo, hi));
}

}  // namespace qbc
