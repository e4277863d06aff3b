// Minimal real-amplitude qubit kernel: states, two-outcome projective
// measurements and the Born rule behind a depolarizing channel.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbc {

inline constexpr double kNormTolerance = 1e-12;

/// Pure state a0|0> + a1|1> with real amplitudes.
class Qubit {
 public:
  Qubit(double a0, double a1) : a0_(a0), a1_(a1) {
    if (std::abs(a0 * a0 + a1 * a1 - 1.0) > kNormTolerance) {
      throw std::invalid_argument("Qubit: amplitudes are not normalized");
    }
  }

  /// State at angle theta in the real plane: cos(theta)|0> + sin(theta)|1>.
  static Qubit from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

  double a0() const { return a0_; }
  double a1() const { return a1_; }

  friend double inner(const Qubit& x, const Qubit& y) { return x.a0_ * y.a0_ + x.a1_ * y.a1_; }

 private:
  double a0_;
  double a1_;
};

namespace states {
inline Qubit zero() { return {1.0, 0.0}; }
inline Qubit one() { return {0.0, 1.0}; }
inline Qubit plus() { return {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0}; }
inline Qubit minus() { return {std::numbers::sqrt2 / 2.0, -std::numbers::sqrt2 / 2.0}; }
}  // namespace states

/// Orthonormal basis; v0 is the outcome-0 eigenvector, v1 the outcome-1 one.
class Basis {
 public:
  Basis(Qubit v0, Qubit v1) : v0_(v0), v1_(v1) {
    if (std::abs(inner(v0, v1)) > kNormTolerance) {
      throw std::invalid_argument("Basis: vectors are not orthogonal");
    }
  }

  /// Basis whose outcome-0 vector sits at angle theta.
  static Basis from_angle(double theta) {
    return {Qubit::from_angle(theta), Qubit::from_angle(theta + std::numbers::pi / 2.0)};
  }

  const Qubit& v0() const { return v0_; }
  const Qubit& v1() const { return v1_; }

  Basis swapped() const { return {v1_, v0_}; }

 private:
  Qubit v0_;
  Qubit v1_;
};

/// Depolarizing probability r: the state is replaced by I/2 with probability r.
class Noise {
 public:
  constexpr Noise() = default;
  explicit Noise(double r) : r_(r) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("Noise: r must lie in [0, 1]");
  }
  constexpr double r() const { return r_; }

 private:
  double r_ = 0.0;
};

inline Basis computational_basis() { return {states::zero(), states::one()}; }

/// Diagonal basis with |+> as outcome 0.
inline Basis hadamard_basis() { return {states::plus(), states::minus()}; }

/// Breidbart basis: |0> rotated by -pi/8 (outcome 0) and |+> rotated by
/// +pi/8 (outcome 1). Minimum-error basis for discriminating |0> from |+>.
inline Basis breidbart() {
  const double c = std::cos(std::numbers::pi / 8.0);
  const double s = std::sin(std::numbers::pi / 8.0);
  return {Qubit{c, -s}, Qubit{s, c}};
}

/// Probability of outcome 0 when measuring `s`, sent through a depolarizing
/// channel of strength `n`, in basis `b`.
inline double born(const Basis& b, const Qubit& s, Noise n) {
  const double overlap = inner(b.v0(), s);
  return (1.0 - n.r()) * overlap * overlap + n.r() / 2.0;
}

/// Optimal (Helstrom) success probability for telling |0> from |+> with
/// equal priors after depolarization.
inline double helstrom_success(Noise n) {
  return 0.5 + (1.0 - n.r()) / (2.0 * std::numbers::sqrt2);
}

}  // namespace qbc
