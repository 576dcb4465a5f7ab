#include "kasner/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kasner/error.hpp"

namespace kasner {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
constexpr double kMinTimeFraction = 1e-8;

void check_spec(const ModeSpec& spec) {
  if (!(spec.t0 > 0.0) || !std::isfinite(spec.t0)) {
    throw Error(ErrorCode::NonPositiveTime, "t0 must be positive and finite");
  }
}

void check_tol(double tol, double samples_per_decade) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (!(samples_per_decade > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "samples per decade must be positive");
  }
}

SolverOptions mode_options(double tol, double scale) {
  SolverOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-6 * (scale > 0.0 ? scale : 1.0);
  opt.groups = {0, 0, 1, 1};
  return opt;
}

// Number of grid intervals for a span of |ds| in log time.
std::size_t grid_intervals(double ds, double samples_per_decade) {
  const double n = std::ceil(std::abs(ds) / std::numbers::ln10 * samples_per_decade);
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

}  // namespace

double ModeTrajectory::abscissa(std::size_t i) const {
  const double x = data_->x[i];
  if (view_ == data_->native) return x;
  return view_ == Coordinate::LogTime ? std::log(x) : std::exp(x);
}

cplx ModeTrajectory::derivative(std::size_t i) const {
  const cplx d = data_->deriv[i];
  if (view_ == data_->native) return d;
  const double x = data_->x[i];
  return view_ == Coordinate::LogTime ? d * x : d / std::exp(x);
}

std::pair<cplx, cplx> ModeTrajectory::evaluate(double x) const {
  if (view_ == Coordinate::PhysicalTime) return alpha(x);
  return beta(x);
}

std::pair<cplx, cplx> ModeTrajectory::alpha(double t) const {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "t must be positive");
  if (data_->native == Coordinate::PhysicalTime) return data_->solution.evaluate(t);
  auto [v, d] = data_->solution.evaluate(std::log(t));
  return {v, d / t};
}

std::pair<cplx, cplx> ModeTrajectory::beta(double s) const {
  if (data_->native == Coordinate::LogTime) return data_->solution.evaluate(s);
  const double t = std::exp(s);
  auto [v, d] = data_->solution.evaluate(t);
  return {v, d * t};
}

double ModeTrajectory::t_min() const {
  const double a = data_->x.front();
  const double b = data_->x.back();
  const double lo = std::min(a, b);
  return data_->native == Coordinate::PhysicalTime ? lo : std::exp(lo);
}

double ModeTrajectory::t_max() const {
  const double a = data_->x.front();
  const double b = data_->x.back();
  const double hi = std::max(a, b);
  return data_->native == Coordinate::PhysicalTime ? hi : std::exp(hi);
}

ModeTrajectory solve_mode_t(const KasnerExponents& k, const ModeSpec& spec, double t_end,
                            double tol, double samples_per_decade) {
  check_spec(spec);
  check_tol(tol, samples_per_decade);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::NonPositiveTime, "t_end must be positive and finite");
  }
  if (t_end < kMinTimeFraction * spec.t0) {
    throw Error(ErrorCode::DomainLimit,
                "physical-time solves stop at 1e-8 t0; use log time closer to t = 0");
  }
  const auto& p = k.values();
  const std::array<double, 3> w2{spec.w[0] * spec.w[0], spec.w[1] * spec.w[1],
                                 spec.w[2] * spec.w[2]};
  SystemRhs rhs = [p, w2](double t, std::span<const double> y, std::span<double> dy) {
    double q = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (w2[j] != 0.0) q += w2[j] * std::pow(t, -2.0 * p[j]);
    }
    q *= kFourPiSq;
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -y[2] / t - q * y[0];
    dy[3] = -y[3] / t - q * y[1];
  };
  const double scale = std::max(std::abs(spec.alpha0), std::abs(spec.alphadot0) * spec.t0);
  std::vector<double> y0{spec.alpha0.real(), spec.alpha0.imag(), spec.alphadot0.real(),
                         spec.alphadot0.imag()};
  SampledSolution sol(dopri5(rhs, spec.t0, std::move(y0), t_end, mode_options(tol, scale)));

  const double ds = std::log(t_end / spec.t0);
  const std::size_t n = grid_intervals(ds, samples_per_decade);
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    x[i] = spec.t0 * std::exp(ds * static_cast<double>(i) / static_cast<double>(n));
  }
  x.front() = spec.t0;
  x.back() = t_end;
  std::vector<cplx> value(n + 1), deriv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) std::tie(value[i], deriv[i]) = sol.evaluate(x[i]);

  auto data = std::make_shared<const ModeTrajectory::Data>(ModeTrajectory::Data{k, spec, Coordinate::PhysicalTime,
                                                std::move(sol), std::move(x),
                                                std::move(value), std::move(deriv)});
  return ModeTrajectory(std::move(data), Coordinate::PhysicalTime);
}

ModeTrajectory solve_mode_s(const KasnerExponents& k, const ModeSpec& spec, double s_end,
                            double tol, double samples_per_decade) {
  check_spec(spec);
  check_tol(tol, samples_per_decade);
  if (!std::isfinite(s_end)) throw Error(ErrorCode::InvalidArgument, "s_end must be finite");
  const auto& p = k.values();
  std::array<double, 3> coef{};
  std::array<double, 3> rate{};
  for (int j = 0; j < 3; ++j) {
    coef[j] = kFourPiSq * spec.w[j] * spec.w[j];
    rate[j] = 2.0 - 2.0 * p[j];
  }
  SystemRhs rhs = [coef, rate](double s, std::span<const double> y, std::span<double> dy) {
    double K = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (coef[j] != 0.0) K += coef[j] * std::exp(rate[j] * s);
    }
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -K * y[0];
    dy[3] = -K * y[1];
  };
  const double s0 = std::log(spec.t0);
  const cplx dbeta0 = spec.t0 * spec.alphadot0;
  const double scale = std::max(std::abs(spec.alpha0), std::abs(dbeta0));
  std::vector<double> y0{spec.alpha0.real(), spec.alpha0.imag(), dbeta0.real(),
                         dbeta0.imag()};
  SampledSolution sol(dopri5(rhs, s0, std::move(y0), s_end, mode_options(tol, scale)));

  const double ds = s_end - s0;
  const std::size_t n = grid_intervals(ds, samples_per_decade);
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    x[i] = s0 + ds * static_cast<double>(i) / static_cast<double>(n);
  }
  x.back() = s_end;
  std::vector<cplx> value(n + 1), deriv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) std::tie(value[i], deriv[i]) = sol.evaluate(x[i]);

  auto data = std::make_shared<const ModeTrajectory::Data>(ModeTrajectory::Data{k, spec, Coordinate::LogTime,
                                                std::move(sol), std::move(x),
                                                std::move(value), std::move(deriv)});
  return ModeTrajectory(std::move(data), Coordinate::LogTime);
}

ModeTrajectory convert_trajectory(const ModeTrajectory& traj, Coordinate target) {
  return ModeTrajectory(traj.data_, target);
}

std::vector<EnergySample> energy_functional(const ModeTrajectory& traj, Part part) {
  const std::size_t n = traj.size();
  if (part == Part::Auto) {
    double mag = 0.0;
    double imag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = traj.value(i);
      const cplx d = traj.derivative(i);
      mag = std::max({mag, std::abs(v), std::abs(d)});
      imag = std::max({imag, std::abs(v.imag()), std::abs(d.imag())});
    }
    if (imag > 1e-12 * mag) {
      throw Error(ErrorCode::ComplexInput,
                  "energy functional needs a real trajectory or an explicit part");
    }
    part = Part::Real;
  }
  const ModeTrajectory view = convert_trajectory(traj, Coordinate::LogTime);
  std::vector<EnergySample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = view.abscissa(i);
    const cplx v = view.value(i);
    const cplx d = view.derivative(i);
    const double b = part == Part::Real ? v.real() : v.imag();
    const double db = part == Part::Real ? d.real() : d.imag();
    out[i] = {s, db * db + potential_K(traj.exponents(), traj.spec().w, s) * b * b};
  }
  return out;
}

}  // namespace kasner
