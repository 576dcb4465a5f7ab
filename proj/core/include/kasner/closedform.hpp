#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kasner/exponents.hpp"
#include "kasner/modes.hpp"

namespace kasner {

enum class BasisCase {
  FlatZero,          // {1, t0 ln(t/t0)}
  FlatAxisPhase,     // exp(+-2 pi i w_a ln t)
  FlatBessel,        // J, Y of order 2 pi i w_a at 2 pi rho t
  AxisymZero,        // {1, t0 ln(t/t0)}
  AxisymLongitudinal,  // J0, Y0 at (3/2) pi |w_c| t^{4/3}
  AxisymTransverse,  // J0, Y0 at 6 pi rho t^{1/3}
  AxisymHeun,        // biconfluent Heun pair
};

std::string_view to_string(BasisCase c);

/// u1, u1', u2, u2' at one time.
struct BasisValue {
  cplx u1;
  cplx du1;
  cplx u2;
  cplx du2;
};

/// Two independent solutions of the mode equation, valid for t >= 1e-6.
class SolutionBasis {
 public:
  class Impl;

  BasisCase kind() const;
  /// Reference time (lower limit of the Heun integral, log origin).
  double t0() const;
  std::string describe() const;

  BasisValue eval(double t) const;
  /// Evaluates at many times; for the Heun pair the second member's integral
  /// is accumulated along the sorted times instead of restarted from t0.
  std::vector<BasisValue> eval_many(std::span<const double> ts) const;

  std::pair<cplx, cplx> u1(double t) const;
  std::pair<cplx, cplx> u2(double t) const;
  /// u1 u2' - u1' u2.
  cplx wronskian(double t) const;

  explicit SolutionBasis(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Flat exponents (some p_j = 1). t0 fixes the log origin of the zero-momentum
/// pair. Throws WrongClass otherwise.
SolutionBasis flat_basis(const KasnerExponents& k, const Momentum& w, double t0 = 1.0);

/// Exponents that permute (-1/3, 2/3, 2/3); momentum components are read
/// relative to the contracting index. Throws WrongClass otherwise.
SolutionBasis axisym_basis(const KasnerExponents& k, const Momentum& w, double t0 = 1.0);

/// Dispatches on the class of k. Generic exponents throw WrongClass.
SolutionBasis closed_form_basis(const KasnerExponents& k, const Momentum& w,
                                double t0 = 1.0);

/// c1 u1 + c2 u2 fitted to initial data at t0.
struct MatchedSolution {
  SolutionBasis basis;
  cplx c1;
  cplx c2;
  double t0;
};

/// Solves the 2x2 system at spec.t0. Throws DegenerateWronskian if
/// |W| < 1e-12 of its natural scale.
MatchedSolution match_constants(const SolutionBasis& basis, const ModeSpec& spec);

/// Value and t-derivative of the matched combination.
std::pair<cplx, cplx> eval_matched(const MatchedSolution& m, double t);
std::vector<std::pair<cplx, cplx>> eval_matched_many(const MatchedSolution& m,
                                                     std::span<const double> ts);

struct Comparison {
  double max_deviation = 0.0;
  double worst_t = 0.0;
  std::size_t samples = 0;
};

/// Largest deviation between the matched closed form and a trajectory over
/// its samples, measured against the local amplitude
///   |alpha_num - alpha| / sqrt(|alpha|^2 + |t alpha'|^2 / (1 + K(ln t))),
/// which stays meaningful at zeros of an oscillating mode.
Comparison compare_with_trajectory(const MatchedSolution& m, const ModeTrajectory& traj);

}  // namespace kasner
