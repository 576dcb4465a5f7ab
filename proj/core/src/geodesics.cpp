#include "kasner/geodesics.hpp"

#include <algorithm>
#include <cmath>

#include "kasner/error.hpp"
#include "kasner/integrate.hpp"

namespace kasner {

namespace {

// Local error target of the stepper relative to the requested accuracy;
// leaves room for accumulation over a few thousand steps.
constexpr double kStepperFraction = 1e-2;

Momentum as_momentum(const Vec3& a) { return Momentum{a}; }

void require_momentum(const Vec3& a) {
  if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0) {
    throw Error(ErrorCode::ZeroMomentum, "momentum must be nonzero");
  }
}

double max_abs(const Vec3& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

}  // namespace

NullTangent init_lightlike(const KasnerExponents& k, const GeodesicInit& init) {
  if (!(init.t0 > 0.0)) throw Error(ErrorCode::NonPositiveTime, "t0 must be positive");
  if (init.v[0] == 0.0 && init.v[1] == 0.0 && init.v[2] == 0.0) {
    throw Error(ErrorCode::ZeroDirection, "initial direction must be nonzero");
  }
  NullTangent out;
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double scale = std::pow(init.t0, 2.0 * k.p(j));
    sum += init.v[j] * init.v[j] * scale;
    out.a[j] = scale * init.v[j];
  }
  out.dt = std::sqrt(sum);
  out.dx = init.v;
  return out;
}

GeodesicRecord integrate_geodesic(const KasnerExponents& k, const GeodesicInit& init,
                                  double s_end, double tol, std::size_t samples) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  const NullTangent n0 = init_lightlike(k, init);
  const Vec3 p = k.values();

  // State: t, x1, x2, x3, t', x1', x2', x3'.
  SystemRhs rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    const double t = y[0];
    if (!(t > 0.0)) {
      throw Error(ErrorCode::StepUnderflow, "geodesic reached t <= 0");
    }
    double tdd = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double xd = y[5 + j];
      tdd -= p[j] * std::pow(t, 2.0 * p[j] - 1.0) * xd * xd;
      dy[1 + j] = xd;
      dy[5 + j] = -2.0 * (p[j] / t) * y[4] * xd;
    }
    dy[0] = y[4];
    dy[4] = tdd;
  };
  std::vector<double> y0{init.t0,    init.x0[0], init.x0[1], init.x0[2],
                         n0.dt,      n0.dx[0],   n0.dx[1],   n0.dx[2]};
  SolverOptions opt;
  opt.rtol = tol * kStepperFraction;
  opt.atol = opt.rtol * 1e-3 * std::max(init.t0, n0.dt);
  const DenseSolution sol = dopri5(rhs, 0.0, std::move(y0), s_end, opt);

  GeodesicRecord rec;
  rec.a = n0.a;
  rec.tol = tol;
  rec.accepted_steps = sol.accepted_steps();
  const double amax = max_abs(n0.a);
  std::array<double, 8> y{};
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = i + 1 == samples
                         ? s_end
                         : s_end * static_cast<double>(i) / static_cast<double>(samples - 1);
    sol.state(s, y);
    GeodesicSample g;
    g.s = s;
    g.t = y[0];
    g.dt = y[4];
    double spatial = 0.0;
    double drift = 0.0;
    for (int j = 0; j < 3; ++j) {
      g.x[j] = y[1 + j];
      g.dx[j] = y[5 + j];
      const double scale = std::pow(g.t, 2.0 * p[j]);
      spatial += scale * g.dx[j] * g.dx[j];
      drift = std::max(drift, std::abs(scale * g.dx[j] - n0.a[j]));
    }
    g.null_deviation = (spatial - g.dt * g.dt) / (g.dt * g.dt);
    g.momentum_drift = drift / amax;
    rec.max_null_deviation = std::max(rec.max_null_deviation, std::abs(g.null_deviation));
    rec.max_momentum_drift = std::max(rec.max_momentum_drift, g.momentum_drift);
    rec.samples.push_back(g);
  }
  return rec;
}

double affine_parameter_at(const KasnerExponents& k, const Vec3& a, double t0, double T,
                           double tol) {
  require_momentum(a);
  if (!(t0 > 0.0) || !(T > 0.0)) throw Error(ErrorCode::NonPositiveTime, "times must be positive");
  return adaptive_quad([&](double t) { return 1.0 / energy(k, a, t); }, t0, T, tol);
}

double energy(const KasnerExponents& k, const Vec3& a, double t) {
  require_momentum(a);
  return frequency_f(k, as_momentum(a), t);
}

Wavelengths wavelengths(const KasnerExponents& k, const Vec3& a, double t, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  require_momentum(a);
  return {h / energy(k, a, t), 1.0 / frequency_f(k, as_momentum(a), t)};
}

double RedshiftReport::max_deviation() const {
  return std::max({dev_energy_large_time, dev_energy_formula, dev_large_time_formula});
}

RedshiftReport redshift(const KasnerExponents& k, const Vec3& a, double t_p, double t_q,
                        double h) {
  require_momentum(a);
  if (!(t_p > 0.0 && t_p < t_q)) throw Error(ErrorCode::BadOrdering, "redshift needs 0 < t_p < t_q");
  RedshiftReport r;
  r.t_p = t_p;
  r.t_q = t_q;
  r.h = h;
  r.at_p = wavelengths(k, a, t_p, h);
  r.at_q = wavelengths(k, a, t_q, h);
  r.z_energy = r.at_q.lambda_E / r.at_p.lambda_E - 1.0;
  r.z_large_time = r.at_q.lambda_LT / r.at_p.lambda_LT - 1.0;
  double sp = 0.0;
  double sq = 0.0;
  for (int j = 0; j < 3; ++j) {
    sp += a[j] * a[j] / std::pow(t_p, 2.0 * k.p(j));
    sq += a[j] * a[j] / std::pow(t_q, 2.0 * k.p(j));
  }
  r.z_formula = std::sqrt(sp / sq) - 1.0;
  auto dev = [](double x, double y) { return std::abs(x - y) / (1.0 + std::abs(y)); };
  r.dev_energy_large_time = dev(r.z_energy, r.z_large_time);
  r.dev_energy_formula = dev(r.z_energy, r.z_formula);
  r.dev_large_time_formula = dev(r.z_large_time, r.z_formula);
  return r;
}

}  // namespace kasner
