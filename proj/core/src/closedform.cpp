#include "kasner/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "kasner/error.hpp"
#include "kasner/specfun.hpp"

namespace kasner {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinTime = 1e-6;
constexpr double kHeunQuadTol = 1e-12;
const cplx kI(0.0, 1.0);

void check_time(double t) {
  if (!(t >= kMinTime) || !std::isfinite(t)) {
    throw Error(ErrorCode::DomainLimit, "closed-form bases are evaluated only for t >= 1e-6");
  }
}

void check_t0(double t0) {
  if (!(t0 >= kMinTime) || !std::isfinite(t0)) {
    throw Error(ErrorCode::DomainLimit, "reference time must be >= 1e-6");
  }
}

std::string index_label(const char* name, int idx) {
  std::ostringstream os;
  os << name << "(index=" << idx + 1 << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(BasisCase c) {
  switch (c) {
    case BasisCase::FlatZero: return "FlatZero";
    case BasisCase::FlatAxisPhase: return "FlatAxisPhase";
    case BasisCase::FlatBessel: return "FlatBessel";
    case BasisCase::AxisymZero: return "AxisymZero";
    case BasisCase::AxisymLongitudinal: return "AxisymLongitudinal";
    case BasisCase::AxisymTransverse: return "AxisymTransverse";
    case BasisCase::AxisymHeun: return "AxisymHeun";
  }
  return "Unknown";
}

class SolutionBasis::Impl {
 public:
  Impl(BasisCase kind, double t0, int index) : kind_(kind), t0_(t0), index_(index) {}
  virtual ~Impl() = default;

  BasisCase kind() const { return kind_; }
  double t0() const { return t0_; }
  std::string describe() const {
    return index_label(std::string(to_string(kind_)).c_str(), index_);
  }

  virtual BasisValue eval(double t) const = 0;
  virtual std::vector<BasisValue> eval_many(std::span<const double> ts) const {
    std::vector<BasisValue> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(eval(t));
    return out;
  }

 private:
  BasisCase kind_;
  double t0_;
  int index_;
};

namespace {

class LogPair final : public SolutionBasis::Impl {
 public:
  LogPair(BasisCase kind, double t0, int index) : Impl(kind, t0, index) {}
  BasisValue eval(double t) const override {
    check_time(t);
    return {1.0, 0.0, t0() * std::log(t / t0()), t0() / t};
  }
};

class PhasePair final : public SolutionBasis::Impl {
 public:
  PhasePair(double w, double t0, int index)
      : Impl(BasisCase::FlatAxisPhase, t0, index), w_(w) {}
  BasisValue eval(double t) const override {
    check_time(t);
    const double phase = 2.0 * kPi * w_ * std::log(t);
    const cplx e1 = std::polar(1.0, phase);
    const cplx e2 = std::conj(e1);
    const cplx k = 2.0 * kPi * kI * w_ / t;
    return {e1, k * e1, e2, -k * e2};
  }

 private:
  double w_;
};

// J_nu(z(t)), Y_nu(z(t)) with z = scale t^power.
class BesselPair final : public SolutionBasis::Impl {
 public:
  BesselPair(BasisCase kind, cplx nu, double scale, double power, double t0, int index)
      : Impl(kind, t0, index), nu_(nu), scale_(scale), power_(power) {}
  BasisValue eval(double t) const override {
    check_time(t);
    const double tp = power_ == 1.0 ? t : std::pow(t, power_);
    const double z = scale_ * tp;
    const double dz = scale_ * power_ * tp / t;
    const SeriesResult j = bessel_j(nu_, z);
    const SeriesResult y = bessel_y(nu_, z);
    return {j.value, j.derivative * dz, y.value, y.derivative * dz};
  }

 private:
  cplx nu_;
  double scale_;
  double power_;
};

// u1 = exp(-(3/2) pi i |w| t^{4/3}) HeunB(delta, L t^{2/3}),
// u2 = u1 * int_{t0}^{t} du / (u1(u)^2 u).
// u1 is a complex multiple of a real solution, so it has zeros on the
// positive axis where the integrand has double poles. Their residues vanish,
// so the integral is taken along t0 -> t0 + i eta -> t + i eta -> t.
class HeunPair final : public SolutionBasis::Impl {
 public:
  HeunPair(double w_abs, double rho, double t0, int index)
      : Impl(BasisCase::AxisymHeun, t0, index), w_(w_abs), rho_(rho) {
    L_ = std::sqrt(1.5 * kPi * w_abs) * cplx(1.0, 1.0);
    delta_ = -18.0 * kPi * kPi * rho * rho / L_;
  }

  BasisValue eval(double t) const override {
    const double ts[1] = {t};
    return eval_many(ts).front();
  }

  std::vector<BasisValue> eval_many(std::span<const double> ts) const override {
    std::vector<BasisValue> out(ts.size());
    if (ts.empty()) return out;
    for (double t : ts) check_time(t);
    std::vector<std::size_t> order(ts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&ts](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
    const double eta = offset(std::min(ts[order.front()], t0()));
    HeunBContinuation heun(delta_);
    const cplx rise = segment(t0(), cplx(t0(), eta), heun);

    // Walk outward from t0 along the shifted line, dropping to each sample.
    const auto split = std::partition_point(order.begin(), order.end(),
                                            [&](std::size_t i) { return ts[i] < t0(); });
    auto walk = [&](auto first, auto last) {
      cplx acc = rise;
      cplx prev(t0(), eta);
      for (auto it = first; it != last; ++it) {
        const double t = ts[*it];
        const cplx top(t, eta);
        acc += segment(prev, top, heun);
        prev = top;
        const cplx I = t == t0() ? cplx(0.0) : acc + segment(top, cplx(t, 0.0), heun);
        const auto [u, du] = first_solution(t, heun);
        out[*it] = {u, du, u * I, du * I + 1.0 / (u * t)};
      }
    };
    walk(split, order.end());
    walk(std::make_reverse_iterator(split), order.rend());
    return out;
  }

 private:
  // Keeps the path inside Re u > 0 and within about one radian of phase
  // from the axis.
  double offset(double t_low) const {
    const double f0 = std::sqrt(w_ * w_ * std::cbrt(t0() * t0()) +
                                rho_ * rho_ / std::cbrt(std::pow(t0(), 4.0)));
    return std::min(0.25 * t_low, 0.5 / (2.0 * kPi * f0));
  }

  std::pair<cplx, cplx> first_solution(double t, HeunBContinuation& heun) const {
    const double t13 = std::cbrt(t);
    const double t23 = t13 * t13;
    const SeriesResult h = heun.eval(L_ * t23);
    const cplx e = std::polar(1.0, -1.5 * kPi * w_ * t23 * t23);
    const cplx dx = (2.0 / 3.0) * L_ / t13;
    const cplx u = e * h.value;
    const cplx du = e * (h.derivative * dx - 2.0 * kPi * kI * w_ * t13 * h.value);
    return {u, du};
  }

  cplx integrand(cplx u, HeunBContinuation& heun) const {
    const cplx u23 = std::pow(u, 2.0 / 3.0);
    const cplx h = heun.eval(L_ * u23).value;
    const cplx e = std::exp(3.0 * kPi * kI * w_ * u23 * u23);
    return e / (h * h * u);
  }

  cplx segment(cplx a, cplx b, HeunBContinuation& heun) const {
    if (a == b) return 0.0;
    const cplx d = b - a;
    return complex_path_quad(
        [&](double tau) { return integrand(a + tau * d, heun) * d; }, 0.0, 1.0,
        kHeunQuadTol);
  }

  double w_;
  double rho_;
  cplx L_;
  cplx delta_;
};

}  // namespace

BasisCase SolutionBasis::kind() const { return impl_->kind(); }
double SolutionBasis::t0() const { return impl_->t0(); }
std::string SolutionBasis::describe() const { return impl_->describe(); }
BasisValue SolutionBasis::eval(double t) const { return impl_->eval(t); }
std::vector<BasisValue> SolutionBasis::eval_many(std::span<const double> ts) const {
  return impl_->eval_many(ts);
}

std::pair<cplx, cplx> SolutionBasis::u1(double t) const {
  const BasisValue v = eval(t);
  return {v.u1, v.du1};
}

std::pair<cplx, cplx> SolutionBasis::u2(double t) const {
  const BasisValue v = eval(t);
  return {v.u2, v.du2};
}

cplx SolutionBasis::wronskian(double t) const {
  const BasisValue v = eval(t);
  return v.u1 * v.du2 - v.du1 * v.u2;
}

SolutionBasis flat_basis(const KasnerExponents& k, const Momentum& w, double t0) {
  if (k.kind() != KasnerClass::Flat) {
    throw Error(ErrorCode::WrongClass, "flat basis needs flat exponents, got " + k.describe());
  }
  check_t0(t0);
  const int a = k.index();
  const double wa = w[a];
  const double rho = std::hypot(w[(a + 1) % 3], w[(a + 2) % 3]);
  if (rho == 0.0 && wa == 0.0) {
    return SolutionBasis(std::make_shared<LogPair>(BasisCase::FlatZero, t0, a));
  }
  if (rho == 0.0) return SolutionBasis(std::make_shared<PhasePair>(wa, t0, a));
  return SolutionBasis(std::make_shared<BesselPair>(
      BasisCase::FlatBessel, cplx(0.0, 2.0 * kPi * wa), 2.0 * kPi * rho, 1.0, t0, a));
}

SolutionBasis axisym_basis(const KasnerExponents& k, const Momentum& w, double t0) {
  if (k.kind() != KasnerClass::NonFlatAxisymmetric) {
    throw Error(ErrorCode::WrongClass,
                "axisymmetric basis needs exponents (-1/3, 2/3, 2/3), got " + k.describe());
  }
  check_t0(t0);
  const int c = k.index();
  const double w1 = std::abs(w[c]);
  const double rho = std::hypot(w[(c + 1) % 3], w[(c + 2) % 3]);
  if (w1 == 0.0 && rho == 0.0) {
    return SolutionBasis(std::make_shared<LogPair>(BasisCase::AxisymZero, t0, c));
  }
  if (rho == 0.0) {
    return SolutionBasis(std::make_shared<BesselPair>(BasisCase::AxisymLongitudinal, 0.0,
                                                      1.5 * kPi * w1, 4.0 / 3.0, t0, c));
  }
  if (w1 == 0.0) {
    return SolutionBasis(std::make_shared<BesselPair>(BasisCase::AxisymTransverse, 0.0,
                                                      6.0 * kPi * rho, 1.0 / 3.0, t0, c));
  }
  return SolutionBasis(std::make_shared<HeunPair>(w1, rho, t0, c));
}

SolutionBasis closed_form_basis(const KasnerExponents& k, const Momentum& w, double t0) {
  switch (k.kind()) {
    case KasnerClass::Flat: return flat_basis(k, w, t0);
    case KasnerClass::NonFlatAxisymmetric: return axisym_basis(k, w, t0);
    case KasnerClass::NonFlatGeneric: break;
  }
  throw Error(ErrorCode::WrongClass, "no closed form for generic Kasner exponents");
}

MatchedSolution match_constants(const SolutionBasis& basis, const ModeSpec& spec) {
  const double t0 = spec.t0;
  check_time(t0);
  const BasisValue v = basis.eval(t0);
  const cplx W = v.u1 * v.du2 - v.du1 * v.u2;
  const double scale = std::max(std::abs(v.u1), t0 * std::abs(v.du1)) *
                       std::max(std::abs(v.u2), t0 * std::abs(v.du2)) / t0;
  if (!(std::abs(W) >= 1e-12 * scale)) {
    throw Error(ErrorCode::DegenerateWronskian, "basis is degenerate at t0");
  }
  const cplx c1 = (spec.alpha0 * v.du2 - spec.alphadot0 * v.u2) / W;
  const cplx c2 = (v.u1 * spec.alphadot0 - v.du1 * spec.alpha0) / W;
  return {basis, c1, c2, t0};
}

std::pair<cplx, cplx> eval_matched(const MatchedSolution& m, double t) {
  const BasisValue v = m.basis.eval(t);
  return {m.c1 * v.u1 + m.c2 * v.u2, m.c1 * v.du1 + m.c2 * v.du2};
}

std::vector<std::pair<cplx, cplx>> eval_matched_many(const MatchedSolution& m,
                                                     std::span<const double> ts) {
  const std::vector<BasisValue> vs = m.basis.eval_many(ts);
  std::vector<std::pair<cplx, cplx>> out;
  out.reserve(vs.size());
  for (const BasisValue& v : vs) {
    out.emplace_back(m.c1 * v.u1 + m.c2 * v.u2, m.c1 * v.du1 + m.c2 * v.du2);
  }
  return out;
}

Comparison compare_with_trajectory(const MatchedSolution& m, const ModeTrajectory& traj) {
  const ModeTrajectory view = convert_trajectory(traj, Coordinate::PhysicalTime);
  std::vector<double> ts(view.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = view.abscissa(i);
  const auto closed = eval_matched_many(m, ts);
  Comparison out;
  out.samples = ts.size();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const auto& [a, da] = closed[i];
    const double K = potential_K(traj.exponents(), traj.spec().w, std::log(t));
    const double amp = std::sqrt(std::norm(a) + std::norm(t * da) / (1.0 + K));
    const double dev = std::abs(view.value(i) - a) / amp;
    if (std::isnan(dev) || dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_t = t;
      if (std::isnan(dev)) break;
    }
  }
  return out;
}

}  // namespace kasner
