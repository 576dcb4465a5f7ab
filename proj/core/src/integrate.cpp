#include "kasner/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "kasner/error.hpp"

namespace kasner {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// b - b_hat
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5
constexpr double kFacMax = 10.0;  // largest growth
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

constexpr double kUround = std::numeric_limits<double>::epsilon();

class ErrorNorm {
 public:
  ErrorNorm(std::size_t dim, const std::vector<int>& groups, double rtol, double atol)
      : rtol_(rtol), atol_(atol) {
    if (groups.empty()) {
      group_.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) group_[i] = static_cast<int>(i);
      count_ = dim;
    } else {
      if (groups.size() != dim) {
        throw Error(ErrorCode::InvalidArgument, "error groups must match dimension");
      }
      group_ = groups;
      int hi = -1;
      for (int g : groups) {
        if (g < 0) throw Error(ErrorCode::InvalidArgument, "negative error group");
        hi = std::max(hi, g);
      }
      count_ = static_cast<std::size_t>(hi + 1);
    }
    err_.resize(count_);
    ya_.resize(count_);
    yb_.resize(count_);
  }

  double operator()(std::span<const double> err, std::span<const double> ya,
                    std::span<const double> yb) {
    std::fill(err_.begin(), err_.end(), 0.0);
    std::fill(ya_.begin(), ya_.end(), 0.0);
    std::fill(yb_.begin(), yb_.end(), 0.0);
    for (std::size_t i = 0; i < err.size(); ++i) {
      const auto g = static_cast<std::size_t>(group_[i]);
      err_[g] += err[i] * err[i];
      ya_[g] += ya[i] * ya[i];
      yb_[g] += yb[i] * yb[i];
    }
    double acc = 0.0;
    for (std::size_t g = 0; g < count_; ++g) {
      const double scale = atol_ + rtol_ * std::sqrt(std::max(ya_[g], yb_[g]));
      acc += err_[g] / (scale * scale);
    }
    return std::sqrt(acc / static_cast<double>(count_));
  }

 private:
  double rtol_;
  double atol_;
  std::vector<int> group_;
  std::size_t count_ = 0;
  std::vector<double> err_, ya_, yb_;
};

double initial_step(const SystemRhs& rhs, double t0, std::span<const double> y0,
                    std::span<const double> f0, double dir, double hmax,
                    double rtol, double atol) {
  const std::size_t n = y0.size();
  double dnf = 0.0;
  double dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  std::vector<double> y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + dir * h * f0[i];
  rhs(t0 + dir * h, y1, f1);
  double der2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

template <typename T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <typename T, typename F>
T simpson(const F& f, double a, double b, T fa, T fm, T fb, T whole, double eps,
          int depth) {
  constexpr int kMaxDepth = 60;
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  if (!(lm > a && lm < m && rm > m && rm < b)) {
    throw Error(ErrorCode::MaxDepthExceeded, "quadrature interval below resolution");
  }
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  // Round-off in the integrand (about 1e-13 relative near its peaks) sets a
  // floor below which subdividing further cannot help.
  const double floor = 1024.0 * kUround * (magnitude(left) + magnitude(right));
  if (magnitude(delta) <= 15.0 * std::max(eps, floor)) return left + right + delta / 15.0;
  if (depth >= kMaxDepth) {
    throw Error(ErrorCode::MaxDepthExceeded, "adaptive Simpson depth cap reached");
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
}

// Starts from a fixed panel split so periodic integrands cannot fool the
// first Simpson comparison.
template <typename T, typename F>
T adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::InvalidArgument, "integration limits must be finite");
  }
  if (a == b) return T{};
  if (a > b) return -adaptive_simpson<T>(f, b, a, tol);

  constexpr int kPanels = 8;
  std::array<T, 2 * kPanels + 1> samples;
  const double width = (b - a) / kPanels;
  for (int i = 0; i <= 2 * kPanels; ++i) {
    const double x = i == 2 * kPanels ? b : a + 0.5 * width * i;
    samples[i] = f(x);
  }
  std::array<T, kPanels> panel;
  T coarse{};
  for (int p = 0; p < kPanels; ++p) {
    panel[p] = width / 6.0 * (samples[2 * p] + 4.0 * samples[2 * p + 1] + samples[2 * p + 2]);
    coarse += panel[p];
  }
  const double eps = tol * (1.0 + magnitude(coarse)) / kPanels;
  T total{};
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + width * p;
    const double pb = p == kPanels - 1 ? b : a + width * (p + 1);
    total += simpson(f, pa, pb, samples[2 * p], samples[2 * p + 1], samples[2 * p + 2],
                     panel[p], eps, 0);
  }
  return total;
}

}  // namespace

std::span<const double> DenseSolution::node_state(std::size_t i) const {
  return std::span<const double>(y_).subspan(i * dim_, dim_);
}

std::size_t DenseSolution::locate(double t) const {
  const double lo = std::min(t_.front(), t_.back());
  const double hi = std::max(t_.front(), t_.back());
  const double slack = 8.0 * kUround * std::max(std::abs(lo), std::abs(hi));
  if (t < lo - slack || t > hi + slack) {
    throw Error(ErrorCode::InvalidArgument, "dense output requested outside the solved span");
  }
  const bool increasing = t_.back() >= t_.front();
  std::size_t idx;
  if (increasing) {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    idx = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  } else {
    auto it = std::upper_bound(t_.begin(), t_.end(), t, std::greater<double>());
    idx = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  }
  return std::min(idx, t_.size() - 2);
}

void DenseSolution::state(double t, std::span<double> out) const {
  if (t_.size() == 1) {
    std::copy_n(y_.begin(), dim_, out.begin());
    return;
  }
  const std::size_t i = locate(t);
  const double h = t_[i + 1] - t_[i];
  const double theta = (t - t_[i]) / h;
  const double theta1 = 1.0 - theta;
  const double* y0 = &y_[i * dim_];
  const double* r = &coeff_[i * 4 * dim_];
  for (std::size_t k = 0; k < dim_; ++k) {
    const double r2 = r[k], r3 = r[dim_ + k], r4 = r[2 * dim_ + k], r5 = r[3 * dim_ + k];
    out[k] = y0[k] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
}

std::vector<double> DenseSolution::state(double t) const {
  std::vector<double> out(dim_);
  state(t, out);
  return out;
}

DenseSolution dopri5(const SystemRhs& rhs, double t0, std::vector<double> y0,
                     double t_end, const SolverOptions& options) {
  if (!(options.rtol > 0.0) || !(options.atol >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (!std::isfinite(t0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidArgument, "integration span must be finite");
  }
  const std::size_t n = y0.size();
  DenseSolution sol;
  sol.dim_ = n;
  sol.t_.push_back(t0);
  sol.y_.insert(sol.y_.end(), y0.begin(), y0.end());
  if (t0 == t_end) return sol;

  const double dir = t_end > t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);
  const double hmax = options.max_step > 0.0 ? std::min(options.max_step, span) : span;
  ErrorNorm norm(n, options.groups, options.rtol, options.atol);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  std::vector<double> y = std::move(y0);
  double t = t0;
  rhs(t, y, k1);

  double h = options.initial_step > 0.0
                 ? std::min(options.initial_step, hmax)
                 : initial_step(rhs, t, y, k1, dir, hmax, options.rtol, options.atol);
  double err_old = 1e-4;
  bool rejected_last = false;
  std::size_t steps = 0;

  for (;;) {
    if (steps++ >= options.max_steps) {
      throw Error(ErrorCode::MaxStepsExceeded, "step budget exhausted before reaching t_end");
    }
    if (0.1 * h <= std::abs(t) * kUround) {
      throw Error(ErrorCode::StepUnderflow, "step size underflow (stiff or singular region)");
    }
    bool last = false;
    if ((t + dir * h - t_end) * dir >= 0.0) {
      h = std::abs(t_end - t);
      last = true;
    }
    const double hs = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = last ? t_end : t + hs;
    rhs(t_new, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t_new, y1, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double e = norm(err, y, y1);
    if (!std::isfinite(e)) {
      throw Error(ErrorCode::StepUnderflow, "non-finite state encountered during integration");
    }
    const double fac11 = std::pow(std::max(e, 1e-300), kExpo);

    if (e <= 1.0) {
      // Continuous extension coefficients for this step.
      const std::size_t base = sol.coeff_.size();
      sol.coeff_.resize(base + 4 * n);
      double* r = &sol.coeff_[base];
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        r[i] = ydiff;
        r[n + i] = bspl;
        r[2 * n + i] = ydiff - hs * k7[i] - bspl;
        r[3 * n + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                             d6 * k6[i] + d7 * k7[i]);
      }
      t = t_new;
      y.swap(y1);
      k1.swap(k7);
      sol.t_.push_back(t);
      sol.y_.insert(sol.y_.end(), y.begin(), y.end());
      if (last) break;

      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_new = h / fac;
      if (rejected_last) h_new = std::min(h_new, h);
      err_old = std::max(e, 1e-4);
      rejected_last = false;
      h = std::min(h_new, hmax);
    } else {
      ++sol.rejected_;
      h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      rejected_last = true;
    }
  }
  return sol;
}

cplx SampledSolution::value_at_node(std::size_t i) const {
  const auto s = dense_.node_state(i);
  return {s[0], s[1]};
}

cplx SampledSolution::derivative_at_node(std::size_t i) const {
  const auto s = dense_.node_state(i);
  return {s[2], s[3]};
}

std::pair<cplx, cplx> SampledSolution::evaluate(double t) const {
  std::array<double, 4> s{};
  dense_.state(t, s);
  return {cplx(s[0], s[1]), cplx(s[2], s[3])};
}

cplx SampledSolution::value(double t) const { return evaluate(t).first; }

cplx SampledSolution::derivative(double t) const { return evaluate(t).second; }

SampledSolution solve_ivp(const IVPProblem& p) {
  if (!p.a || !p.b) {
    throw Error(ErrorCode::InvalidArgument, "IVP coefficient callbacks must be set");
  }
  const bool forced = static_cast<bool>(p.c);
  SystemRhs rhs = [&p, forced](double t, std::span<const double> y, std::span<double> dy) {
    const cplx v(y[0], y[1]);
    const cplx d(y[2], y[3]);
    cplx dd = -p.a(t) * d - p.b(t) * v;
    if (forced) dd += p.c(t);
    dy[0] = d.real();
    dy[1] = d.imag();
    dy[2] = dd.real();
    dy[3] = dd.imag();
  };
  SolverOptions options;
  options.rtol = p.rtol;
  options.atol = p.atol;
  options.groups = {0, 0, 1, 1};
  std::vector<double> y0{p.y0.real(), p.y0.imag(), p.dy0.real(), p.dy0.imag()};
  return SampledSolution(dopri5(rhs, p.t0, std::move(y0), p.t_end, options));
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double tol) {
  auto checked = [&f](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::IntegrandSingular, "integrand is not finite");
    }
    return v;
  };
  return adaptive_simpson<double>(checked, a, b, tol);
}

cplx complex_path_quad(const std::function<cplx(double)>& f, double a, double b,
                       double tol) {
  auto checked = [&f](double x) {
    const cplx v = f(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::IntegrandSingular, "integrand is not finite");
    }
    return v;
  };
  return adaptive_simpson<cplx>(checked, a, b, tol);
}

}  // namespace kasner
