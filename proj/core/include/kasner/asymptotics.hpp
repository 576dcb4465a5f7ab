#pragma once

#include <vector>

#include "kasner/exponents.hpp"
#include "kasner/modes.hpp"

namespace kasner {

/// Behaviour of a mode as t -> 0, fitted in log time s = ln t.
struct SmallTimeFit {
  enum class Regime {
    Logarithmic,  // beta(s) ~ c1 s + c2
    Oscillatory,  // beta(s) ~ c1 e^{2 pi i w s} + c2 e^{-2 pi i w s}
  };
  Regime regime = Regime::Logarithmic;
  cplx c1;
  cplx c2;
  /// w on the flat axis (Oscillatory only).
  double frequency = 0.0;
  double s_floor = 0.0;
  /// max |beta - fit| over [s_floor, s_floor + 5].
  double residual_sup = 0.0;
  /// Same quantity for the fit made 5 units deeper.
  double residual_deeper = 0.0;
};

/// Fits the small-time form at s_floor (and at s_floor - 5 as a depth check)
/// from a log-time solve of the mode. The logarithmic constants are
/// extrapolated in exp(lambda_min s) from s_floor and s_floor + 1. Throws
/// RegimeMismatch if the deeper residual is not smaller (above a round-off
/// floor), and InvalidArgument unless s_floor + 5 <= ln t0.
SmallTimeFit small_time_fit(const KasnerExponents& k, const ModeSpec& spec, double s_floor,
                            double tol = 1e-11);

/// (sum_j w_j^2 t^{2 - 2 p_j})^{1/4}. Throws ZeroMomentum for w = 0.
double wkb_envelope(const KasnerExponents& k, const Momentum& w, double t);

/// 2 pi int_{t0}^{t} f(u) du. Exact when a single component is active,
/// adaptive quadrature otherwise.
double wkb_phase(const KasnerExponents& k, const Momentum& w, double t0, double t,
                 double tol = 1e-12);

/// Large-time fit alpha(t) * envelope(t) ~ c1 e^{i phi(t)} + c2 e^{-i phi(t)},
/// phi measured from phase_t0.
struct WKBFit {
  cplx c1;
  cplx c2;
  double phase_t0 = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// Onset used by the amplitude bound: the window start.
  double onset_T = 0.0;
  double residual_sup = 0.0;
  std::size_t samples = 0;
};

/// Least squares over samples spaced uniformly in phase (at least 32 per
/// cycle). Throws IllConditionedFit if the phase advances by less than pi
/// over the window, InvalidArgument if the window leaves the trajectory.
WKBFit large_time_fit(const ModeTrajectory& traj, double phase_t0, double T1, double T2,
                      double tol = 1e-12);

/// Residual of an existing fit over another window.
double wkb_residual(const ModeTrajectory& traj, const WKBFit& fit, double T1, double T2,
                    double tol = 1e-12);

struct AmplitudeBound {
  /// First sample from which |alpha| <= (|c1| + |c2| + 1) / envelope holds
  /// at every later sample.
  double T = 0.0;
  /// True if the bound holds at the last sample.
  bool holds = false;
  std::size_t samples = 0;
};

/// Checks the bound on samples spaced at most 1/16 cycle apart across the
/// whole trajectory.
AmplitudeBound amplitude_bound_check(const ModeTrajectory& traj, const WKBFit& fit);

/// Zeros of Re alpha(t) in [T1, T2], located from samples 1/16 cycle apart
/// and refined by bisection on the dense output.
std::vector<double> zero_crossings(const ModeTrajectory& traj, double T1, double T2);

/// int f over consecutive zeros, one entry per pair.
std::vector<double> crossing_phase_increments(const KasnerExponents& k, const Momentum& w,
                                              const std::vector<double>& zeros,
                                              double tol = 1e-12);

/// psi_K = K^{-1/4} d^2/ds^2 K^{-1/4}
///       = (1 / (4 sqrt K)) ((5/4) (K'/K)^2 - K''/K).
double wkb_defect(const KasnerExponents& k, const Momentum& w, double s);

/// int_{s0}^{s1} |psi_K(s)| ds.
double wkb_defect_integral(const KasnerExponents& k, const Momentum& w, double s0, double s1,
                           double tol = 1e-12);

}  // namespace kasner
