#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kasner/closedform.hpp"
#include "kasner/error.hpp"
#include "kasner/modes.hpp"
#include "support.hpp"

namespace kasner {
namespace {

using testing::kPi;

ModeSpec spec_of(Momentum w, double t0, cplx a0, cplx da0) {
  ModeSpec s;
  s.w = w;
  s.t0 = t0;
  s.alpha0 = a0;
  s.alphadot0 = da0;
  return s;
}

bool nondecreasing(std::vector<EnergySample> e, double slack) {
  std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.s < b.s; });
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (e[i].E > e[i + 1].E + slack * e[i + 1].E) return false;
  }
  return true;
}

TEST(SolveModeT, ZeroMomentumIsLogarithm) {
  const auto k = testing::generic_example();
  const ModeSpec s = spec_of({}, 2.0, cplx(0.5, -1.0), cplx(0.25, 2.0));
  const ModeTrajectory tr = solve_mode_t(k, s, 50.0);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.abscissa(i);
    const cplx exact = s.alphadot0 * std::log(t / s.t0) * s.t0 + s.alpha0;
    EXPECT_LT(std::abs(tr.value(i) - exact), 1e-9 * (1.0 + std::abs(exact)));
    EXPECT_LT(std::abs(tr.derivative(i) - s.alphadot0 * s.t0 / t), 1e-9);
  }
}

TEST(SolveModeT, FlatAxisPhasePair) {
  const auto k = testing::flat(0);
  const double w1 = 0.7;
  const ModeSpec s = spec_of({{w1, 0, 0}}, 1.0, 1.0, 0.0);
  const ModeTrajectory tr = solve_mode_t(k, s, 30.0, 1e-11);
  // c1 = c2 = 1/2 for alpha(1) = 1, alpha'(1) = 0.
  for (std::size_t i = 0; i < tr.size(); i += 7) {
    const double t = tr.abscissa(i);
    const double exact = std::cos(2.0 * kPi * w1 * std::log(t));
    EXPECT_NEAR(tr.value(i).real(), exact, 1e-8);
  }
}

TEST(SolveModeT, AxisymmetricTransverseMatchesClosedForm) {
  const auto k = testing::axisymmetric(0);
  const ModeSpec s = spec_of({{0, 1, 1}}, 1.0, 1.0, cplx(0.0, 0.3));
  const ModeTrajectory tr = solve_mode_t(k, s, 20.0, 1e-11);
  const MatchedSolution m = match_constants(closed_form_basis(k, s.w, s.t0), s);
  EXPECT_LT(compare_with_trajectory(m, tr).max_deviation, 1e-7);
}

TEST(SolveModeT, RefusesSpansNearZero) {
  const auto k = testing::axisymmetric(0);
  const ModeSpec s = spec_of({{1, 0, 0}}, 1.0, 1.0, 0.0);
  try {
    solve_mode_t(k, s, 1e-9);
    ADD_FAILURE() << "span below 1e-8 t0 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainLimit);
  }
  EXPECT_THROW(solve_mode_t(k, spec_of({}, -1.0, 1.0, 0.0), 2.0), Error);
}

TEST(SolveModeS, AgreesWithSolveModeT) {
  const auto k = testing::generic_example();
  const ModeSpec s = spec_of({{0.4, -0.8, 0.3}}, 1.0, cplx(1.0, 0.5), cplx(-0.2, 0.1));
  const ModeTrajectory down_t = solve_mode_t(k, s, 0.1, 1e-11);
  const ModeTrajectory up_t = solve_mode_t(k, s, 10.0, 1e-11);
  const ModeTrajectory down_s = solve_mode_s(k, s, std::log(0.1), 1e-11);
  const ModeTrajectory up_s = solve_mode_s(k, s, std::log(10.0), 1e-11);
  for (double t = 0.1; t <= 10.0; t *= 1.11) {
    const auto& a = t < 1.0 ? down_t : up_t;
    const auto& b = t < 1.0 ? down_s : up_s;
    const auto [va, da] = a.alpha(t);
    const auto [vb, db] = b.alpha(t);
    EXPECT_LT(std::abs(va - vb), 1e-8 * (1.0 + std::abs(va))) << "t=" << t;
    EXPECT_LT(std::abs(da - db), 1e-8 * (1.0 + std::abs(da))) << "t=" << t;
  }
}

TEST(SolveModeS, ZeroMomentumIsLinear) {
  const auto k = testing::flat(1);
  const ModeSpec s = spec_of({}, 1.0, 2.0, 3.0);
  const ModeTrajectory tr = solve_mode_s(k, s, -20.0);
  for (std::size_t i = 0; i < tr.size(); i += 11) {
    EXPECT_NEAR(tr.value(i).real(), 2.0 + 3.0 * tr.abscissa(i), 1e-9 * (1.0 + 60.0));
    EXPECT_NEAR(tr.derivative(i).real(), 3.0, 1e-10);
  }
}

TEST(SolveModeS, SlopeSettlesTowardsZeroTime) {
  const auto k = testing::axisymmetric(0);
  const ModeSpec s = spec_of({{1, 1, 0}}, 1.0, 1.0, 0.0);
  const ModeTrajectory tr = solve_mode_s(k, s, -20.0);
  // Slowest active rate is 2/3, so each 5 units of s shrink the change ~28x.
  const cplx d10 = tr.beta(-10.0).second;
  const cplx d15 = tr.beta(-15.0).second;
  const cplx d20 = tr.beta(-20.0).second;
  EXPECT_LT(std::abs(d20 - d15), std::abs(d15 - d10) / 20.0);
}

TEST(ConvertTrajectory, RoundTripAndChainRule) {
  const auto k = testing::generic_example();
  const ModeSpec s = spec_of({{0.2, 0.3, 0.4}}, 1.0, 1.0, 0.5);
  const ModeTrajectory tr = solve_mode_s(k, s, 2.0);
  const ModeTrajectory in_t = convert_trajectory(tr, Coordinate::PhysicalTime);
  const ModeTrajectory back = convert_trajectory(in_t, Coordinate::LogTime);
  ASSERT_EQ(back.size(), tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(back.abscissa(i), tr.abscissa(i));
    EXPECT_EQ(back.value(i), tr.value(i));
    EXPECT_EQ(back.derivative(i), tr.derivative(i));
    EXPECT_EQ(in_t.value(i), tr.value(i));
  }
  const auto beta1 = tr.beta(1.0);
  const auto alpha_e = in_t.evaluate(std::exp(1.0));
  EXPECT_LT(std::abs(alpha_e.second - beta1.second / std::exp(1.0)), 1e-15);
  EXPECT_EQ(in_t.coordinate(), Coordinate::PhysicalTime);
  EXPECT_EQ(in_t.native(), Coordinate::LogTime);
}

TEST(ConvertTrajectory, ConstantStaysConstant) {
  const ModeSpec s = spec_of({}, 3.0, 1.5, 0.0);
  const ModeTrajectory tr = solve_mode_t(testing::flat(), s, 30.0);
  const ModeTrajectory in_s = convert_trajectory(tr, Coordinate::LogTime);
  for (std::size_t i = 0; i < in_s.size(); ++i) {
    EXPECT_EQ(in_s.value(i), cplx(1.5));
    EXPECT_EQ(in_s.derivative(i), cplx(0.0));
  }
}

TEST(Energy, ZeroMomentumConstant) {
  const ModeSpec s = spec_of({}, 1.0, 1.0, 2.0);
  const auto e = energy_functional(solve_mode_s(testing::generic_example(), s, -5.0));
  for (const auto& x : e) EXPECT_NEAR(x.E, 4.0, 1e-9);
}

TEST(Energy, FlatAxisConserved) {
  const ModeSpec s = spec_of({{0.9, 0, 0}}, 1.0, 1.0, 0.3);
  const auto e = energy_functional(solve_mode_s(testing::flat(0), s, -8.0, 1e-11));
  for (const auto& x : e) EXPECT_NEAR(x.E, e.front().E, 1e-8 * e.front().E);
}

TEST(Energy, ComplexNeedsPart) {
  const ModeSpec s = spec_of({{0.5, 0.5, 0}}, 1.0, cplx(1.0, 1.0), 0.0);
  const ModeTrajectory tr = solve_mode_s(testing::axisymmetric(), s, -3.0);
  try {
    energy_functional(tr);
    ADD_FAILURE() << "complex trajectory accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ComplexInput);
  }
  EXPECT_TRUE(nondecreasing(energy_functional(tr, Part::Real), 1e-8));
  EXPECT_TRUE(nondecreasing(energy_functional(tr, Part::Imag), 1e-8));
}

TEST(ModeProperties, LinearityAndRealness) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const auto k = testing::random_generic(rng);
    const Momentum w{{g(rng), g(rng), g(rng)}};
    const ModeSpec a = spec_of(w, 1.0, g(rng), g(rng));
    const ModeSpec b = spec_of(w, 1.0, g(rng), g(rng));
    const ModeSpec sum = spec_of(w, 1.0, a.alpha0 + b.alpha0, a.alphadot0 + b.alphadot0);
    const auto ta = solve_mode_s(k, a, -6.0, 1e-11);
    const auto tb = solve_mode_s(k, b, -6.0, 1e-11);
    const auto ts = solve_mode_s(k, sum, -6.0, 1e-11);
    for (double s = -6.0; s <= 0.0; s += 0.37) {
      const cplx lhs = ta.beta(s).first + tb.beta(s).first;
      const cplx rhs = ts.beta(s).first;
      EXPECT_LT(std::abs(lhs - rhs), 1e-8 * (1.0 + std::abs(rhs)));
      EXPECT_LE(std::abs(rhs.imag()), 1e-12 * std::abs(rhs));
    }
  }
}

}  // namespace
}  // namespace kasner
