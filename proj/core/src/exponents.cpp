#include "kasner/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kasner/error.hpp"

namespace kasner {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

}  // namespace

KasnerExponents KasnerExponents::make(double p1, double p2, double p3,
                                      double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  const std::array<double, 3> p{p1, p2, p3};
  for (double v : p) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::ConstraintViolation, "exponents must be finite");
    }
  }
  const double lin = p1 + p2 + p3 - 1.0;
  const double quad = p1 * p1 + p2 * p2 + p3 * p3 - 1.0;
  if (std::abs(lin) > tol || std::abs(quad) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "sum p - 1 = " << lin << ", sum p^2 - 1 = " << quad
       << " (tol " << tol << ")";
    throw Error(ErrorCode::ConstraintViolation, os.str());
  }

  for (int j = 0; j < 3; ++j) {
    if (std::abs(p[j] - 1.0) <= tol) {
      return KasnerExponents(p, KasnerClass::Flat, j, tol);
    }
  }
  // Compare against the exact targets rather than testing pairwise equality.
  for (int j = 0; j < 3; ++j) {
    bool match = std::abs(p[j] + 1.0 / 3.0) <= tol;
    for (int l = 0; l < 3 && match; ++l) {
      if (l != j) match = std::abs(p[l] - 2.0 / 3.0) <= tol;
    }
    if (match) return KasnerExponents(p, KasnerClass::NonFlatAxisymmetric, j, tol);
  }
  return KasnerExponents(p, KasnerClass::NonFlatGeneric, -1, tol);
}

double KasnerExponents::linear_residual() const {
  return p_[0] + p_[1] + p_[2] - 1.0;
}

double KasnerExponents::quadratic_residual() const {
  return p_[0] * p_[0] + p_[1] * p_[1] + p_[2] * p_[2] - 1.0;
}

std::string KasnerExponents::describe() const {
  switch (kind_) {
    case KasnerClass::Flat:
      return "Flat(axis=" + std::to_string(index_ + 1) + ")";
    case KasnerClass::NonFlatAxisymmetric:
      return "NonFlatAxisymmetric(index=" + std::to_string(index_ + 1) + ")";
    case KasnerClass::NonFlatGeneric:
      return "NonFlatGeneric";
  }
  return "Unknown";
}

double potential_K(const KasnerExponents& k, const Momentum& w, double s) {
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    if (w[j] == 0.0) continue;
    sum += w[j] * w[j] * std::exp((2.0 - 2.0 * k.p(j)) * s);
  }
  return kFourPiSq * sum;
}

PotentialDerivatives potential_K_derivatives(const KasnerExponents& k,
                                             const Momentum& w, double s) {
  PotentialDerivatives out{0.0, 0.0, 0.0};
  for (int j = 0; j < 3; ++j) {
    if (w[j] == 0.0) continue;
    const double rate = 2.0 - 2.0 * k.p(j);
    const double term = kFourPiSq * w[j] * w[j] * std::exp(rate * s);
    out.K += term;
    out.dK += rate * term;
    out.d2K += rate * rate * term;
  }
  return out;
}

double frequency_f(const KasnerExponents& k, const Momentum& w, double t) {
  if (!(t > 0.0)) {
    throw Error(ErrorCode::NonPositiveTime, "frequency requires t > 0");
  }
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    if (w[j] == 0.0) continue;
    sum += w[j] * w[j] * std::pow(t, -2.0 * k.p(j));
  }
  return std::sqrt(sum);
}

FrequencyLimit frequency_limit(const KasnerExponents& k, const Momentum& w) {
  if (k.is_flat()) {
    const int a = k.index();
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    return {FrequencyLimit::Kind::Constant, std::hypot(w[b], w[c])};
  }
  for (int j = 0; j < 3; ++j) {
    if (k.p(j) < 0.0 && w[j] != 0.0) return {FrequencyLimit::Kind::Infinite};
  }
  return {FrequencyLimit::Kind::Zero};
}

DecayRates active_rates(const KasnerExponents& k, const Momentum& w) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int j = 0; j < 3; ++j) {
    if (w[j] == 0.0) continue;
    const double rate = 2.0 - 2.0 * k.p(j);
    lo = std::min(lo, rate);
    hi = std::max(hi, rate);
  }
  if (hi < lo) return {0.0, 0.0};
  return {lo, hi};
}

}  // namespace kasner
