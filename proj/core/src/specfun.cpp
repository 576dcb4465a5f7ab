#include "kasner/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "kasner/error.hpp"
#include "mp.hpp"

namespace kasner {

namespace {

using detail::MpComplex;
using detail::MpReal;

constexpr double kPi = std::numbers::pi;
constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;
constexpr double kLogPi = 1.1447298858494001741434273513530587;

constexpr std::size_t kBesselTermCap = 10'000;
constexpr std::size_t kHeunTermCap = 100'000;
constexpr int kMaxPrecisionRetries = 4;

// B_{2k} / (2k (2k - 1)) for k = 1..8.
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,     -1.0 / 360.0,          1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0,   -691.0 / 360360.0,     1.0 / 156.0,  -3617.0 / 122400.0};

cplx stirling(cplx w) {
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx series = kStirling.back();
  for (int k = static_cast<int>(kStirling.size()) - 2; k >= 0; --k) {
    series = kStirling[k] + inv2 * series;
  }
  return (w - 0.5) * std::log(w) - w + kHalfLog2Pi + inv * series;
}

// Re z >= 0.5: shift upward until |w| >= 15, then Stirling.
cplx log_gamma_right(cplx z) {
  cplx w = z;
  double log_mod = 0.0;
  double arg_sum = 0.0;
  while (std::abs(w) < 15.0) {
    log_mod += std::log(std::abs(w));
    arg_sum += std::arg(w);
    w += 1.0;
  }
  return stirling(w) - cplx(log_mod, arg_sum);
}

// sin(pi z) with the real part reduced exactly modulo 2.
cplx sin_pi(cplx z) {
  const double r = z.real() - 2.0 * std::round(0.5 * z.real());
  return std::sin(kPi * cplx(r, z.imag()));
}

cplx cos_pi(cplx z) {
  const double r = z.real() - 2.0 * std::round(0.5 * z.real());
  return std::cos(kPi * cplx(r, z.imag()));
}

bool is_nonpositive_integer(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
}

// Upper bound on log2 of the largest Bessel series term and the index past
// which the terms decay.
struct MagnitudeProfile {
  double max_log2;
  std::size_t stop_index;
};

MagnitudeProfile bessel_profile(cplx nu, double x, double tol) {
  const double q = 0.25 * x * x;
  double log_c = 0.0;
  double max_log = 0.0;
  const double drop = 64.0 - std::log2(tol);
  for (std::size_t k = 0; k < kBesselTermCap; ++k) {
    const double kp = static_cast<double>(k + 1);
    const double ratio = q / (kp * std::abs(kp + nu));
    log_c += std::log2(ratio);
    max_log = std::max(max_log, log_c);
    if (ratio < 1.0 && log_c < max_log - drop) return {max_log, k};
  }
  return {max_log, kBesselTermCap};
}

struct BesselSums {
  cplx sum;      // sum_k c_k
  cplx weighted; // sum_k k c_k
  std::size_t terms;
  double truncation;
  double sum_log2;
};

// c_0 = 1, c_{k+1} = c_k (-x^2/4) / ((k+1)(k+1+nu)).
BesselSums bessel_sums(cplx nu, double x, double tol, mpfr_prec_t bits,
                       std::size_t peak_index) {
  MpComplex c(bits), sum(bits), weighted(bits), ratio(bits), tmp(bits);
  MpReal a(bits), b(bits), norm(bits), q(bits), scratch(bits);

  mpfr_set_d(q.get(), x, MPFR_RNDN);
  mpfr_sqr(q.get(), q.get(), MPFR_RNDN);
  mpfr_div_2ui(q.get(), q.get(), 2, MPFR_RNDN);
  mpfr_neg(q.get(), q.get(), MPFR_RNDN);
  b.set(nu.imag());

  c.set_one();
  sum.set_one();
  const double log2_tol = std::log2(tol);
  int small_run = 0;
  std::size_t k = 0;
  double last_log = 0.0;
  for (; k < kBesselTermCap; ++k) {
    a.set(nu.real());
    mpfr_add_ui(a.get(), a.get(), k + 1, MPFR_RNDN);
    mpfr_sqr(norm.get(), a.get(), MPFR_RNDN);
    mpfr_sqr(scratch.get(), b.get(), MPFR_RNDN);
    mpfr_add(norm.get(), norm.get(), scratch.get(), MPFR_RNDN);
    mpfr_mul_ui(norm.get(), norm.get(), k + 1, MPFR_RNDN);
    // ratio = q (a - i b) / ((k+1) |a + i b|^2)
    mpfr_mul(ratio.re.get(), q.get(), a.get(), MPFR_RNDN);
    mpfr_div(ratio.re.get(), ratio.re.get(), norm.get(), MPFR_RNDN);
    mpfr_mul(ratio.im.get(), q.get(), b.get(), MPFR_RNDN);
    mpfr_div(ratio.im.get(), ratio.im.get(), norm.get(), MPFR_RNDN);
    mpfr_neg(ratio.im.get(), ratio.im.get(), MPFR_RNDN);

    detail::mul(tmp, c, ratio, scratch);
    detail::swap(c, tmp);
    detail::add_to(sum, c);
    detail::add_scaled_to(weighted, c, k + 1, tmp);

    if (k >= peak_index) {
      last_log = c.log2_abs();
      if (last_log < sum.log2_abs() + log2_tol) {
        if (++small_run >= 2) break;
      } else {
        small_run = 0;
      }
    }
  }
  if (k >= kBesselTermCap) {
    throw Error(ErrorCode::NoConvergence, "Bessel series exceeded term cap");
  }
  const double sum_log = sum.log2_abs();
  return {sum.to_complex(), weighted.to_complex(), k + 2,
          std::exp2(last_log - sum_log), sum_log};
}

SeriesResult bessel_j_nonneg(cplx nu, double x, double tol) {
  const MagnitudeProfile profile = bessel_profile(nu, x, tol);
  if (profile.stop_index >= kBesselTermCap) {
    throw Error(ErrorCode::NoConvergence, "Bessel series exceeded term cap");
  }
  std::size_t peak = 0;
  {
    const double q = 0.25 * x * x;
    while (peak < profile.stop_index &&
           q >= static_cast<double>(peak + 1) * std::abs(static_cast<double>(peak + 1) + nu)) {
      ++peak;
    }
  }
  const double max_log = profile.max_log2 + std::log2(1.0 + 0.5 * x);
  const cplx log_pref = nu * std::log(0.5 * x) - log_gamma(nu + 1.0);
  double expected_log = std::min(0.0, 0.5 * std::log2(2.0 / (kPi * std::max(x, 1.0))));

  BesselSums sums{};
  mpfr_prec_t bits = detail::precision_for(max_log, expected_log);
  for (int attempt = 0; attempt < kMaxPrecisionRetries; ++attempt) {
    sums = bessel_sums(nu, x, tol, bits, peak);
    const mpfr_prec_t needed = detail::precision_for(max_log, sums.sum_log2);
    if (needed <= bits) break;
    bits = needed + 32;
  }

  const cplx pref = std::exp(log_pref);
  SeriesResult out;
  out.value = pref * sums.sum;
  out.derivative = (nu / x) * out.value + pref * (2.0 / x) * sums.weighted;
  out.terms_used = sums.terms;
  out.truncation_estimate = sums.truncation;
  return out;
}

// Y_0 from the logarithmic series, all in extended precision:
//   Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k d_k ],
//   d_k = (x^2/4)^k / (k!)^2.
SeriesResult bessel_y0(double x, double tol) {
  const MagnitudeProfile profile = bessel_profile(0.0, x, tol);
  if (profile.stop_index >= kBesselTermCap) {
    throw Error(ErrorCode::NoConvergence, "Bessel series exceeded term cap");
  }
  // H_k grows like log k; the derivative sums carry an extra factor k.
  const double max_log = profile.max_log2 +
                         std::log2(2.0 + std::log(static_cast<double>(profile.stop_index) + 1.0)) +
                         std::log2(1.0 + x);
  const double q_double = 0.25 * x * x;
  const double log2_tol = std::log2(tol);

  double expected_log = std::min(0.0, 0.5 * std::log2(2.0 / (kPi * std::max(x, 1.0))));
  mpfr_prec_t bits = detail::precision_for(max_log, expected_log);

  SeriesResult out;
  for (int attempt = 0; attempt < kMaxPrecisionRetries; ++attempt) {
    MpReal d(bits), q(bits), harmonic(bits), j0(bits), t(bits), dj(bits),
        dt(bits), term(bits), lg(bits), y(bits), dy(bits), scratch(bits);
    mpfr_set_d(q.get(), x, MPFR_RNDN);
    mpfr_sqr(q.get(), q.get(), MPFR_RNDN);
    mpfr_div_2ui(q.get(), q.get(), 2, MPFR_RNDN);
    mpfr_set_ui(d.get(), 1, MPFR_RNDN);
    mpfr_set_ui(j0.get(), 1, MPFR_RNDN);

    int small_run = 0;
    std::size_t k = 1;
    double last_log = 0.0;
    for (; k < kBesselTermCap; ++k) {
      mpfr_mul(d.get(), d.get(), q.get(), MPFR_RNDN);
      mpfr_div_ui(d.get(), d.get(), k, MPFR_RNDN);
      mpfr_div_ui(d.get(), d.get(), k, MPFR_RNDN);
      mpfr_set_ui(scratch.get(), 1, MPFR_RNDN);
      mpfr_div_ui(scratch.get(), scratch.get(), k, MPFR_RNDN);
      mpfr_add(harmonic.get(), harmonic.get(), scratch.get(), MPFR_RNDN);

      const bool odd = (k % 2) == 1;
      // J0 += (-1)^k d_k ; dJ += (-1)^k k d_k
      if (odd) {
        mpfr_sub(j0.get(), j0.get(), d.get(), MPFR_RNDN);
      } else {
        mpfr_add(j0.get(), j0.get(), d.get(), MPFR_RNDN);
      }
      mpfr_mul_ui(term.get(), d.get(), k, MPFR_RNDN);
      if (odd) {
        mpfr_sub(dj.get(), dj.get(), term.get(), MPFR_RNDN);
      } else {
        mpfr_add(dj.get(), dj.get(), term.get(), MPFR_RNDN);
      }
      // T += (-1)^{k+1} H_k d_k ; dT += (-1)^{k+1} k H_k d_k
      mpfr_mul(term.get(), d.get(), harmonic.get(), MPFR_RNDN);
      if (odd) {
        mpfr_add(t.get(), t.get(), term.get(), MPFR_RNDN);
      } else {
        mpfr_sub(t.get(), t.get(), term.get(), MPFR_RNDN);
      }
      mpfr_mul_ui(term.get(), term.get(), k, MPFR_RNDN);
      if (odd) {
        mpfr_add(dt.get(), dt.get(), term.get(), MPFR_RNDN);
      } else {
        mpfr_sub(dt.get(), dt.get(), term.get(), MPFR_RNDN);
      }

      if (q_double < static_cast<double>(k + 1) * static_cast<double>(k + 1)) {
        last_log = term.log2_abs();
        if (last_log < j0.log2_abs() + log2_tol && last_log < t.log2_abs() + log2_tol) {
          if (++small_run >= 2) break;
        } else {
          small_run = 0;
        }
      }
    }
    if (k >= kBesselTermCap) {
      throw Error(ErrorCode::NoConvergence, "Bessel Y0 series exceeded term cap");
    }

    // lg = ln(x/2) + Euler gamma
    mpfr_set_d(lg.get(), x, MPFR_RNDN);
    mpfr_div_2ui(lg.get(), lg.get(), 1, MPFR_RNDN);
    mpfr_log(lg.get(), lg.get(), MPFR_RNDN);
    mpfr_const_euler(scratch.get(), MPFR_RNDN);
    mpfr_add(lg.get(), lg.get(), scratch.get(), MPFR_RNDN);

    // y = lg J0 + T ; dy = J0/x + (2/x)(lg dJ + dT)
    mpfr_mul(y.get(), lg.get(), j0.get(), MPFR_RNDN);
    mpfr_add(y.get(), y.get(), t.get(), MPFR_RNDN);
    mpfr_mul(dy.get(), lg.get(), dj.get(), MPFR_RNDN);
    mpfr_add(dy.get(), dy.get(), dt.get(), MPFR_RNDN);
    mpfr_mul_2ui(dy.get(), dy.get(), 1, MPFR_RNDN);
    mpfr_add(dy.get(), dy.get(), j0.get(), MPFR_RNDN);
    mpfr_div_d(dy.get(), dy.get(), x, MPFR_RNDN);

    const double result_log = std::min(y.log2_abs(), j0.log2_abs());
    const mpfr_prec_t needed = detail::precision_for(max_log, result_log);
    out.value = cplx((2.0 / kPi) * y.to_double(), 0.0);
    out.derivative = cplx((2.0 / kPi) * dy.to_double(), 0.0);
    out.terms_used = k + 1;
    out.truncation_estimate = std::exp2(last_log - y.log2_abs());
    if (needed <= bits) break;
    bits = needed + 32;
  }
  return out;
}

struct HeunProfile {
  double max_log2;
  std::size_t peak_index;
};

// Bound sequence B_{m+1} = (|delta x/2| B_m + 2 m |x|^2 B_{m-1}) / (m+1)^2,
// which dominates |a_m x^m| term by term.
HeunProfile heun_profile(cplx delta, cplx x, double tol) {
  const double hx = std::abs(0.5 * delta * x);
  const double x2 = std::norm(x);
  double prev = 0.0;
  double cur = 1.0;
  double offset = 0.0;  // log2 scale carried outside prev/cur
  double max_log = 0.0;
  std::size_t peak = 0;
  const double drop = 64.0 - std::log2(tol);
  for (std::size_t m = 0; m < kHeunTermCap; ++m) {
    const double mp1 = static_cast<double>(m + 1);
    const double next = (hx * cur + 2.0 * static_cast<double>(m) * x2 * prev) / (mp1 * mp1);
    prev = cur;
    cur = next;
    if (cur > 1e200) {
      prev *= 1e-200;
      cur *= 1e-200;
      offset += 200.0 * std::log2(10.0);
    }
    const double log_cur = std::log2(cur) + offset;
    if (log_cur > max_log) {
      max_log = log_cur;
      peak = m + 1;
    }
    if (m + 1 > peak && log_cur < max_log - drop) return {max_log, peak};
  }
  throw Error(ErrorCode::NoConvergence, "HeunB series exceeded term cap");
}

template <bool kWithDerivative>
SeriesResult heun_impl(cplx delta, cplx x, double tol) {
  check_tol(tol);
  if (x == cplx(0.0, 0.0)) return {cplx(1.0, 0.0), 0.5 * delta, 1, 0.0};

  const HeunProfile profile = heun_profile(delta, x, tol);
  const double max_log = profile.max_log2 +
                         (kWithDerivative ? std::log2(static_cast<double>(profile.peak_index) + 2.0) : 0.0);
  mpfr_prec_t bits = detail::precision_for(max_log, 0.0);
  const double log2_tol = std::log2(tol);

  SeriesResult out;
  for (int attempt = 0; attempt < kMaxPrecisionRetries; ++attempt) {
    MpComplex prev(bits), cur(bits), next(bits), sum(bits), weighted(bits),
        hx(bits), x2(bits), tmp(bits), xm(bits);
    MpReal scratch(bits);

    // hx = (delta / 2) x ; x2 = x^2
    tmp.set(0.5 * delta);
    xm.set(x);
    detail::mul(hx, tmp, xm, scratch);
    detail::mul(x2, xm, xm, scratch);

    cur.set_one();
    sum.set_one();
    std::size_t m = 0;
    int small_run = 0;
    double last_log = 0.0;
    for (; m < kHeunTermCap; ++m) {
      detail::mul(next, hx, cur, scratch);
      if (m > 0) {
        detail::mul(tmp, x2, prev, scratch);
        mpfr_mul_ui(tmp.re.get(), tmp.re.get(), 2 * m, MPFR_RNDN);
        mpfr_mul_ui(tmp.im.get(), tmp.im.get(), 2 * m, MPFR_RNDN);
        detail::add_to(next, tmp);
      }
      const unsigned long denom = static_cast<unsigned long>(m + 1) * static_cast<unsigned long>(m + 1);
      mpfr_div_ui(next.re.get(), next.re.get(), denom, MPFR_RNDN);
      mpfr_div_ui(next.im.get(), next.im.get(), denom, MPFR_RNDN);

      detail::swap(prev, cur);
      detail::swap(cur, next);
      detail::add_to(sum, cur);
      if constexpr (kWithDerivative) {
        detail::add_scaled_to(weighted, cur, m + 1, tmp);
      }

      if (m + 1 > profile.peak_index) {
        last_log = cur.log2_abs();
        if (last_log < sum.log2_abs() + log2_tol) {
          if (++small_run >= 2) break;
        } else {
          small_run = 0;
        }
      }
    }
    if (m >= kHeunTermCap) {
      throw Error(ErrorCode::NoConvergence, "HeunB series exceeded term cap");
    }

    const double sum_log = sum.log2_abs();
    out.value = sum.to_complex();
    if constexpr (kWithDerivative) out.derivative = weighted.to_complex() / x;
    out.terms_used = m + 2;
    out.truncation_estimate = std::exp2(last_log - sum_log);
    const mpfr_prec_t needed = detail::precision_for(max_log, sum_log);
    if (needed <= bits) break;
    bits = needed + 32;
  }
  return out;
}

// Hankel expansion for large x:
//   H1,2 = sqrt(2/(pi x)) exp(+-i w) P(+-i / x),  w = x - nu pi/2 - pi/4,
//   P(z) = sum_k a_k z^k,  a_k = a_{k-1} (4 nu^2 - (2k-1)^2) / (8k).
struct HankelPair {
  SeriesResult h1;
  SeriesResult h2;
};

constexpr double kHankelMinArgument = 20.0;
constexpr std::size_t kHankelTermCap = 200;

std::optional<HankelPair> hankel_asymptotic(cplx nu, double x, double tol) {
  if (x < kHankelMinArgument) return std::nullopt;
  const cplx mu4 = 4.0 * nu * nu;
  const cplx i(0.0, 1.0);
  cplx p1 = 1.0, p2 = 1.0, dp1 = 0.0, dp2 = 0.0;
  cplx a = 1.0;
  double prev = 1.0;
  std::size_t k = 1;
  double last = 1.0;
  for (;; ++k) {
    if (k > kHankelTermCap) return std::nullopt;
    const double odd = static_cast<double>(2 * k - 1);
    a *= (mu4 - odd * odd) / (8.0 * static_cast<double>(k) * x);
    last = std::abs(a);
    if (last > prev && last > tol) return std::nullopt;  // diverging before converged
    // i^k and (-i)^k
    static constexpr std::array<cplx, 4> kPowI = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    const cplx ik = kPowI[k % 4];
    const cplx mik = std::conj(ik);
    const double kx = -static_cast<double>(k) / x;
    p1 += ik * a;
    p2 += mik * a;
    dp1 += kx * ik * a;
    dp2 += kx * mik * a;
    if (last < 0.1 * tol) break;
    prev = last;
  }
  const double amp = std::sqrt(2.0 / (kPi * x));
  // exp(i x) separately, so the phase keeps libm's exact argument reduction.
  const cplx ex(std::cos(x), std::sin(x));
  const cplx shift = std::exp(-i * (nu * (0.5 * kPi) + 0.25 * kPi));
  const cplx e1 = ex * shift;
  const cplx e2 = std::conj(ex) / shift;
  HankelPair out;
  out.h1.value = amp * e1 * p1;
  out.h2.value = amp * e2 * p2;
  out.h1.derivative = amp * e1 * ((i - 0.5 / x) * p1 + dp1);
  out.h2.derivative = amp * e2 * ((-i - 0.5 / x) * p2 + dp2);
  out.h1.terms_used = out.h2.terms_used = k + 1;
  out.h1.truncation_estimate = out.h2.truncation_estimate = last;
  return out;
}

}  // namespace

cplx log_gamma(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorCode::InvalidArgument, "log_gamma of non-finite argument");
  }
  if (is_nonpositive_integer(z)) {
    throw Error(ErrorCode::PoleError, "log_gamma pole at non-positive integer");
  }
  if (z.real() >= 0.5) return log_gamma_right(z);

  // Reflection, with the 2 pi i k that keeps the continuation from the
  // positive real axis.
  const double branch = std::copysign(2.0 * kPi, z.imag()) * std::floor(0.5 * z.real() + 0.25);
  return cplx(kLogPi, branch) - std::log(sin_pi(z)) - log_gamma_right(1.0 - z);
}

SeriesResult bessel_j(cplx nu, double x, double tol) {
  check_tol(tol);
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "bessel_j requires x > 0");
  if (const auto h = hankel_asymptotic(nu, x, tol)) {
    SeriesResult r = h->h1;
    r.value = 0.5 * (h->h1.value + h->h2.value);
    r.derivative = 0.5 * (h->h1.derivative + h->h2.derivative);
    return r;
  }
  if (is_nonpositive_integer(nu) && nu.real() != 0.0) {
    // J_{-n} = (-1)^n J_n
    SeriesResult r = bessel_j_nonneg(-nu, x, tol);
    if (static_cast<long long>(-nu.real()) % 2 != 0) {
      r.value = -r.value;
      r.derivative = -r.derivative;
    }
    return r;
  }
  return bessel_j_nonneg(nu, x, tol);
}

SeriesResult bessel_y(cplx nu, double x, double tol) {
  check_tol(tol);
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "bessel_y requires x > 0");
  if (const auto h = hankel_asymptotic(nu, x, tol)) {
    const cplx two_i(0.0, 2.0);
    SeriesResult r = h->h1;
    r.value = (h->h1.value - h->h2.value) / two_i;
    r.derivative = (h->h1.derivative - h->h2.derivative) / two_i;
    return r;
  }
  if (nu == cplx(0.0, 0.0)) return bessel_y0(x, tol);
  if (nu.imag() == 0.0 && nu.real() == std::round(nu.real())) {
    throw Error(ErrorCode::IntegerOrderUnsupported,
                "Y_nu for nonzero integer order is not implemented");
  }
  const SeriesResult jp = bessel_j(nu, x, tol);
  const SeriesResult jm = bessel_j(-nu, x, tol);
  const cplx c = cos_pi(nu);
  const cplx s = sin_pi(nu);
  SeriesResult out;
  out.value = (jp.value * c - jm.value) / s;
  out.derivative = (jp.derivative * c - jm.derivative) / s;
  out.terms_used = jp.terms_used + jm.terms_used;
  out.truncation_estimate = std::max(jp.truncation_estimate, jm.truncation_estimate);
  return out;
}

SeriesResult heun_b(cplx delta, cplx x, double tol) {
  return heun_impl<true>(delta, x, tol);
}

cplx heun_b_value(cplx delta, cplx x, double tol) {
  return heun_impl<false>(delta, x, tol).value;
}

bool HeunBContinuation::expand(const Center& c, cplx x, SeriesResult& out) const {
  constexpr int kMaxTerms = 200;
  const cplx z = x - c.x;
  if (z == cplx(0.0)) {
    out = {c.y, c.dy, 1, 0.0};
    return true;
  }
  // Terms d_n = c_n z^n of the expansion about x_c, from
  // x_c (n+2)(n+1) c_{n+2} = (2 x_c^2 - (n+1)) (n+1) c_{n+1}
  //                         + (4 x_c n + 2 x_c + delta/2) c_n + 2 n c_{n-1}.
  const cplx xc = c.x;
  const cplx z2 = z * z;
  const cplx z3 = z2 * z;
  cplx dm1 = 0.0;
  cplx d0 = c.y;
  cplx d1 = c.dy * z;
  cplx sum = d0 + d1;
  cplx dsum = d1;
  for (int n = 0; n < kMaxTerms; ++n) {
    const double m = n;
    const cplx num = (2.0 * xc * xc - (m + 1.0)) * (m + 1.0) * z * d1 +
                     (4.0 * xc * m + 2.0 * xc + 0.5 * delta_) * z2 * d0 +
                     2.0 * m * z3 * dm1;
    const cplx d2 = num / (xc * (m + 2.0) * (m + 1.0));
    sum += d2;
    dsum += (m + 2.0) * d2;
    const double mag = std::abs(sum);
    if (n >= 2 && std::abs(d2) + std::abs(d1) <= 1e-17 * mag) {
      out = {sum, dsum / z, static_cast<std::size_t>(n + 3), std::abs(d2) / mag};
      return true;
    }
    dm1 = d0;
    d0 = d1;
    d1 = d2;
  }
  return false;
}

SeriesResult HeunBContinuation::eval(cplx x) {
  constexpr std::size_t kSearch = 16;
  constexpr std::size_t kKeep = 64;
  // Centres reached by Taylor steps from an exact centre, before re-anchoring.
  constexpr int kMaxChain = 256;
  const std::size_t n = centers_.size();
  const Center* nearest = nullptr;
  double nearest_gap = 0.0;
  for (std::size_t i = 0; i < std::min(n, kSearch); ++i) {
    const Center& c = centers_[n - 1 - i];
    const double gap = std::abs(x - c.x);
    if (gap <= c.radius) {
      SeriesResult out;
      if (expand(c, x, out)) return out;
    }
    if (nearest == nullptr || gap / c.radius < nearest_gap / nearest->radius) {
      nearest = &c;
      nearest_gap = gap;
    }
  }

  auto radius_at = [](cplx p) {
    const double ap = std::abs(p);
    // Keeps |2 x_c z| <= 2 and stays well inside the distance to x = 0.
    return std::min(0.25 * ap, 1.0 / (1.0 + ap));
  };
  auto push = [&](Center c) {
    if (centers_.size() == kKeep) centers_.erase(centers_.begin());
    centers_.push_back(c);
    return centers_.back();
  };

  // Step towards x from the nearest centre while the chain is short and
  // each step stays inside the current radius.
  if (nearest != nullptr && nearest->depth < kMaxChain && nearest_gap <= 4.0 * nearest->radius) {
    Center c = *nearest;
    for (;;) {
      const cplx dir = (x - c.x) / std::abs(x - c.x);
      const double gap = std::abs(x - c.x);
      const cplx p = gap <= c.radius ? x : c.x + 0.9 * c.radius * dir;
      SeriesResult out;
      if (!expand(c, p, out)) break;
      const double r = radius_at(p);
      if (!(r > 0.0)) break;
      c = push({p, out.value, out.derivative, r, c.depth + 1});
      if (p == x) return out;
      if (c.depth >= kMaxChain) break;
    }
  }

  SeriesResult exact = heun_b(delta_, x);
  ++computed_;
  const double radius = radius_at(x);
  if (radius > 0.0) push({x, exact.value, exact.derivative, radius, 0});
  return exact;
}

}  // namespace kasner
