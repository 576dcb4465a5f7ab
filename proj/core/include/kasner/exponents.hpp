#pragma once

#include <array>
#include <string>

namespace kasner {

enum class KasnerClass { Flat, NonFlatAxisymmetric, NonFlatGeneric };

/// A validated Kasner exponent triple. The two sum rules
/// sum p_j = 1 and sum p_j^2 = 1 are checked to `tol`; inputs are never
/// projected back onto the Kasner circle.
class KasnerExponents {
 public:
  /// Throws Error(ConstraintViolation) if either sum rule fails by more
  /// than tol, or Error(InvalidArgument) if tol <= 0.
  static KasnerExponents make(double p1, double p2, double p3,
                              double tol = 1e-12);

  double p(int j) const { return p_[j]; }
  const std::array<double, 3>& values() const { return p_; }
  KasnerClass kind() const { return kind_; }
  /// Zero-based flat axis (Flat) or contracting index (NonFlatAxisymmetric);
  /// -1 for generic exponents.
  int index() const { return index_; }
  double tol() const { return tol_; }

  bool is_flat() const { return kind_ == KasnerClass::Flat; }

  /// sum p_j - 1 and sum p_j^2 - 1.
  double linear_residual() const;
  double quadratic_residual() const;

  /// "Flat(axis=1)", "NonFlatAxisymmetric(index=1)" or "NonFlatGeneric";
  /// indices are one-based here.
  std::string describe() const;

 private:
  KasnerExponents(std::array<double, 3> p, KasnerClass kind, int index,
                  double tol)
      : p_(p), kind_(kind), index_(index), tol_(tol) {}

  std::array<double, 3> p_;
  KasnerClass kind_;
  int index_;
  double tol_;
};

/// Fourier momentum (cycles per unit comoving length).
struct Momentum {
  std::array<double, 3> w{};

  double operator[](int j) const { return w[j]; }
  double& operator[](int j) { return w[j]; }
  bool is_zero() const { return w[0] == 0.0 && w[1] == 0.0 && w[2] == 0.0; }
};

/// K(s) = 4 pi^2 sum_j w_j^2 exp((2 - 2 p_j) s).
double potential_K(const KasnerExponents& k, const Momentum& w, double s);

struct PotentialDerivatives {
  double K;
  double dK;
  double d2K;
};

/// K and its first two s-derivatives, each summed term by term.
PotentialDerivatives potential_K_derivatives(const KasnerExponents& k,
                                             const Momentum& w, double s);

/// f(t) = (sum_j w_j^2 t^{-2 p_j})^{1/2}. Throws NonPositiveTime for t <= 0.
double frequency_f(const KasnerExponents& k, const Momentum& w, double t);

struct FrequencyLimit {
  enum class Kind { Constant, Infinite, Zero };
  Kind kind;
  double value = 0.0;  // only meaningful for Constant
};

/// Behaviour of f(t) as t -> infinity.
FrequencyLimit frequency_limit(const KasnerExponents& k, const Momentum& w);

/// Smallest and largest (2 - 2 p_j) over indices with w_j != 0. Both are 0
/// for zero momentum.
struct DecayRates {
  double slowest;
  double fastest;
};
DecayRates active_rates(const KasnerExponents& k, const Momentum& w);

}  // namespace kasner
