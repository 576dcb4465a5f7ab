#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "kasner/exponents.hpp"

namespace kasner::testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kThird = 1.0 / 3.0;

/// A point on the Kasner circle: p_j = 1/3 + (2/3) cos(theta + 2 pi j / 3).
inline KasnerExponents circle_point(double theta) {
  std::array<double, 3> p{};
  for (int j = 0; j < 3; ++j) {
    p[j] = kThird + 2.0 * kThird * std::cos(theta + 2.0 * kPi * j / 3.0);
  }
  return KasnerExponents::make(p[0], p[1], p[2]);
}

inline KasnerExponents axisymmetric(int index = 0) {
  std::array<double, 3> p{2.0 * kThird, 2.0 * kThird, 2.0 * kThird};
  p[index] = -kThird;
  return KasnerExponents::make(p[0], p[1], p[2]);
}

inline KasnerExponents flat(int axis = 0) {
  std::array<double, 3> p{};
  p[axis] = 1.0;
  return KasnerExponents::make(p[0], p[1], p[2]);
}

/// (-0.25, 0.55, 0.70) moved onto the circle along its offset from 1/3.
inline KasnerExponents generic_example() {
  const std::array<double, 3> v{-0.25, 0.55, 0.70};
  std::array<double, 3> d{};
  double n2 = 0.0;
  for (int j = 0; j < 3; ++j) {
    d[j] = v[j] - kThird;
    n2 += d[j] * d[j];
  }
  const double scale = std::sqrt((2.0 / 3.0) / n2);
  return KasnerExponents::make(kThird + scale * d[0], kThird + scale * d[1],
                               kThird + scale * d[2]);
}

/// Random exponents away from the flat and axisymmetric points.
inline KasnerExponents random_generic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (;;) {
    const double theta = u(rng);
    const double gap = std::remainder(theta, kPi / 3.0);
    if (std::abs(gap) > 0.05) return circle_point(theta);
  }
}

inline double rel_err(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::abs(b);
}

}  // namespace kasner::testing
