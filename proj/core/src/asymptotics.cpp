#include "kasner/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kasner/error.hpp"
#include "kasner/integrate.hpp"

namespace kasner {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWindow = 5.0;
constexpr double kFitPerCycle = 32.0;
constexpr double kScanPerCycle = 16.0;
const cplx kI(0.0, 1.0);

void require_momentum(const Momentum& w) {
  if (w.is_zero()) throw Error(ErrorCode::ZeroMomentum, "momentum must be nonzero");
}

// Coefficient and exponent if f(t) = a t^{-p} is a single monomial.
bool monomial_frequency(const KasnerExponents& k, const Momentum& w, double& a, double& p) {
  double sum = 0.0;
  bool found = false;
  for (int j = 0; j < 3; ++j) {
    if (w[j] == 0.0) continue;
    if (found && k.p(j) != p) return false;
    p = k.p(j);
    found = true;
    sum += w[j] * w[j];
  }
  a = std::sqrt(sum);
  return found;
}

struct PhaseFit {
  cplx c1;
  cplx c2;
  double residual = 0.0;
};

// Least squares for y ~ c1 e^{i phi} + c2 e^{-i phi}.
PhaseFit fit_phase_pair(const std::vector<cplx>& y, const std::vector<double>& phi) {
  const double n = static_cast<double>(y.size());
  cplx S = 0.0;   // sum e^{-2 i phi}
  cplx r1 = 0.0;  // sum e^{-i phi} y
  cplx r2 = 0.0;  // sum e^{+i phi} y
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx e = std::polar(1.0, -phi[i]);
    S += e * e;
    r1 += e * y[i];
    r2 += std::conj(e) * y[i];
  }
  // [n, S; conj(S), n] [c1; c2] = [r1; r2]
  const double det = n * n - std::norm(S);
  if (!(det > 1e-8 * n * n)) {
    throw Error(ErrorCode::IllConditionedFit, "phase functions are nearly collinear");
  }
  PhaseFit out;
  out.c1 = (n * r1 - S * r2) / det;
  out.c2 = (n * r2 - std::conj(S) * r1) / det;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx e = std::polar(1.0, phi[i]);
    out.residual = std::max(out.residual, std::abs(y[i] - out.c1 * e - out.c2 * std::conj(e)));
  }
  return out;
}

struct PhaseGrid {
  std::vector<double> t;
  std::vector<double> phi;
};

// Times in [T1, T2] roughly 1/per_cycle of a cycle apart (never fewer than
// 64 intervals), with phases measured from t0.
PhaseGrid phase_grid(const KasnerExponents& k, const Momentum& w, double t0, double T1,
                     double T2, double per_cycle, double tol) {
  PhaseGrid g;
  const double max_dt = (T2 - T1) / 64.0;
  double t = T1;
  double phi = wkb_phase(k, w, t0, T1, tol);
  for (;;) {
    g.t.push_back(t);
    g.phi.push_back(phi);
    if (t >= T2) break;
    const double dt = std::min(1.0 / (per_cycle * frequency_f(k, w, t)), max_dt);
    const double next = t + dt >= T2 - 1e-3 * dt ? T2 : t + dt;
    phi += wkb_phase(k, w, t, next, tol);
    t = next;
  }
  return g;
}

void check_window(const ModeTrajectory& traj, double T1, double T2) {
  if (!(T1 < T2)) throw Error(ErrorCode::BadOrdering, "window needs T1 < T2");
  const double lo = traj.t_min() * (1.0 - 1e-14);
  const double hi = traj.t_max() * (1.0 + 1e-14);
  if (T1 < lo || T2 > hi) {
    throw Error(ErrorCode::InvalidArgument, "window must lie inside the trajectory");
  }
}

double log_residual(const ModeTrajectory& traj, cplx c1, cplx c2, double a, double b) {
  constexpr int kSamples = 500;
  double r = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double s = a + (b - a) * i / kSamples;
    r = std::max(r, std::abs(traj.beta(s).first - c1 * s - c2));
  }
  return r;
}

struct LocalFit {
  cplx c1;
  cplx c2;
  double residual;
};

LocalFit fit_logarithmic(const ModeTrajectory& traj, double lambda, double sf) {
  const auto [b0, d0] = traj.beta(sf);
  cplx c1 = d0;
  cplx c2 = b0 - d0 * sf;
  if (lambda > 0.0) {
    const auto [b1, d1] = traj.beta(sf + 1.0);
    const double r = std::exp(lambda);
    c1 = (r * d0 - d1) / (r - 1.0);
    const cplx g0 = b0 - c1 * sf;
    const cplx g1 = b1 - c1 * (sf + 1.0);
    c2 = (r * g0 - g1) / (r - 1.0);
  }
  return {c1, c2, log_residual(traj, c1, c2, sf, sf + kWindow)};
}

LocalFit fit_oscillatory(const ModeTrajectory& traj, double omega, double sf) {
  const double cycles = std::abs(omega) * kWindow;
  const std::size_t n = std::max<std::size_t>(
      512, static_cast<std::size_t>(std::ceil(kFitPerCycle * cycles)) + 1);
  std::vector<cplx> y(n);
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sf + kWindow * static_cast<double>(i) / static_cast<double>(n - 1);
    y[i] = traj.beta(s).first;
    phi[i] = 2.0 * kPi * omega * s;
  }
  if (2.0 * kPi * cycles < kPi) {
    throw Error(ErrorCode::IllConditionedFit, "less than half a cycle in the fit window");
  }
  const PhaseFit f = fit_phase_pair(y, phi);
  return {f.c1, f.c2, f.residual};
}

}  // namespace

SmallTimeFit small_time_fit(const KasnerExponents& k, const ModeSpec& spec, double s_floor,
                            double tol) {
  const double s0 = std::log(spec.t0);
  if (!(s_floor + kWindow <= s0)) {
    throw Error(ErrorCode::InvalidArgument, "s_floor must lie at least 5 below ln t0");
  }
  const ModeTrajectory traj = solve_mode_s(k, spec, s_floor - kWindow, tol);

  SmallTimeFit out;
  out.s_floor = s_floor;
  const bool oscillatory = k.is_flat() && spec.w[k.index()] != 0.0;
  LocalFit at;
  LocalFit deeper;
  if (oscillatory) {
    out.regime = SmallTimeFit::Regime::Oscillatory;
    out.frequency = spec.w[k.index()];
    at = fit_oscillatory(traj, out.frequency, s_floor);
    deeper = fit_oscillatory(traj, out.frequency, s_floor - kWindow);
  } else {
    out.regime = SmallTimeFit::Regime::Logarithmic;
    const double lambda = active_rates(k, spec.w).slowest;
    at = fit_logarithmic(traj, lambda, s_floor);
    deeper = fit_logarithmic(traj, lambda, s_floor - kWindow);
  }
  out.c1 = at.c1;
  out.c2 = at.c2;
  out.residual_sup = at.residual;
  out.residual_deeper = deeper.residual;

  double scale = 1.0;
  for (std::size_t i = 0; i < traj.size(); ++i) scale = std::max(scale, std::abs(traj.value(i)));
  const double noise = 100.0 * tol * scale;
  if (out.residual_deeper >= out.residual_sup && out.residual_sup > noise) {
    throw Error(ErrorCode::RegimeMismatch,
                "small-time residual does not shrink when the fit moves deeper");
  }
  return out;
}

double wkb_envelope(const KasnerExponents& k, const Momentum& w, double t) {
  require_momentum(w);
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "t must be positive");
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    if (w[j] != 0.0) sum += w[j] * w[j] * std::pow(t, 2.0 - 2.0 * k.p(j));
  }
  return std::sqrt(std::sqrt(sum));
}

double wkb_phase(const KasnerExponents& k, const Momentum& w, double t0, double t,
                 double tol) {
  if (!(t0 > 0.0) || !(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "times must be positive");
  if (t == t0 || w.is_zero()) return 0.0;
  double a = 0.0;
  double p = 0.0;
  if (monomial_frequency(k, w, a, p)) {
    if (p == 1.0) return 2.0 * kPi * a * std::log(t / t0);
    const double q = 1.0 - p;
    return 2.0 * kPi * a * (std::pow(t, q) - std::pow(t0, q)) / q;
  }
  return 2.0 * kPi *
         adaptive_quad([&](double u) { return frequency_f(k, w, u); }, t0, t, tol);
}

WKBFit large_time_fit(const ModeTrajectory& traj, double phase_t0, double T1, double T2,
                      double tol) {
  const KasnerExponents& k = traj.exponents();
  const Momentum& w = traj.spec().w;
  require_momentum(w);
  check_window(traj, T1, T2);
  const PhaseGrid g = phase_grid(k, w, phase_t0, T1, T2, kFitPerCycle, tol);
  if (g.phi.back() - g.phi.front() < kPi) {
    throw Error(ErrorCode::IllConditionedFit, "phase advances by less than pi over the window");
  }
  std::vector<cplx> y(g.t.size());
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    y[i] = traj.alpha(g.t[i]).first * wkb_envelope(k, w, g.t[i]);
  }
  const PhaseFit f = fit_phase_pair(y, g.phi);
  WKBFit out;
  out.c1 = f.c1;
  out.c2 = f.c2;
  out.phase_t0 = phase_t0;
  out.window_lo = T1;
  out.window_hi = T2;
  out.onset_T = T1;
  out.residual_sup = f.residual;
  out.samples = g.t.size();
  return out;
}

double wkb_residual(const ModeTrajectory& traj, const WKBFit& fit, double T1, double T2,
                    double tol) {
  const KasnerExponents& k = traj.exponents();
  const Momentum& w = traj.spec().w;
  require_momentum(w);
  check_window(traj, T1, T2);
  const PhaseGrid g = phase_grid(k, w, fit.phase_t0, T1, T2, kFitPerCycle, tol);
  double r = 0.0;
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    const cplx y = traj.alpha(g.t[i]).first * wkb_envelope(k, w, g.t[i]);
    const cplx e = std::polar(1.0, g.phi[i]);
    r = std::max(r, std::abs(y - fit.c1 * e - fit.c2 * std::conj(e)));
  }
  return r;
}

AmplitudeBound amplitude_bound_check(const ModeTrajectory& traj, const WKBFit& fit) {
  const KasnerExponents& k = traj.exponents();
  const Momentum& w = traj.spec().w;
  require_momentum(w);
  const double lo = traj.t_min();
  const double hi = traj.t_max();
  const double amp = std::abs(fit.c1) + std::abs(fit.c2) + 1.0;
  const double max_dt = (hi - lo) / 64.0;
  AmplitudeBound out;
  out.T = lo;
  double t = lo;
  bool last_ok = true;
  for (;;) {
    const bool ok = std::abs(traj.alpha(t).first) <= amp / wkb_envelope(k, w, t);
    ++out.samples;
    last_ok = ok;
    if (t >= hi) {
      if (!ok) out.T = hi;
      break;
    }
    const double dt = std::min(1.0 / (kScanPerCycle * frequency_f(k, w, t)), max_dt);
    const double next = t + dt >= hi ? hi : t + dt;
    if (!ok) out.T = next;
    t = next;
  }
  out.holds = last_ok;
  return out;
}

std::vector<double> zero_crossings(const ModeTrajectory& traj, double T1, double T2) {
  const KasnerExponents& k = traj.exponents();
  const Momentum& w = traj.spec().w;
  require_momentum(w);
  check_window(traj, T1, T2);
  auto re = [&traj](double t) { return traj.alpha(t).first.real(); };
  std::vector<double> zeros;
  const double max_dt = (T2 - T1) / 64.0;
  double a = T1;
  double fa = re(a);
  while (a < T2) {
    const double dt = std::min(1.0 / (kScanPerCycle * frequency_f(k, w, a)), max_dt);
    const double b = a + dt >= T2 ? T2 : a + dt;
    const double fb = re(b);
    if (fa == 0.0) {
      zeros.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a;
      double hi = b;
      double flo = fa;
      for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
           ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = re(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      zeros.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

std::vector<double> crossing_phase_increments(const KasnerExponents& k, const Momentum& w,
                                              const std::vector<double>& zeros, double tol) {
  std::vector<double> out;
  for (std::size_t i = 1; i < zeros.size(); ++i) {
    out.push_back(wkb_phase(k, w, zeros[i - 1], zeros[i], tol) / (2.0 * kPi));
  }
  return out;
}

double wkb_defect(const KasnerExponents& k, const Momentum& w, double s) {
  require_momentum(w);
  const PotentialDerivatives d = potential_K_derivatives(k, w, s);
  const double r1 = d.dK / d.K;
  const double r2 = d.d2K / d.K;
  return (1.25 * r1 * r1 - r2) / (4.0 * std::sqrt(d.K));
}

double wkb_defect_integral(const KasnerExponents& k, const Momentum& w, double s0, double s1,
                           double tol) {
  require_momentum(w);
  return adaptive_quad([&](double s) { return std::abs(wkb_defect(k, w, s)); }, s0, s1, tol);
}

}  // namespace kasner
