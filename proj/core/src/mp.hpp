#pragma once

// Thin RAII layer over MPFR for the ascending-series evaluators. Only the
// operations the series loops need are wrapped; everything is in place to
// avoid allocating temporaries per term.

#include <mpfr.h>

#include <cmath>
#include <complex>
#include <limits>

namespace kasner::detail {

class MpReal {
 public:
  explicit MpReal(mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  MpReal(const MpReal&) = delete;
  MpReal& operator=(const MpReal&) = delete;
  ~MpReal() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  void set(double x) { mpfr_set_d(v_, x, MPFR_RNDN); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// log2 |x|, -inf for zero.
  double log2_abs() const {
    if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
    long e = 0;
    const double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
    return std::log2(std::abs(m)) + static_cast<double>(e);
  }

 private:
  mpfr_t v_;
};

struct MpComplex {
  MpReal re;
  MpReal im;

  explicit MpComplex(mpfr_prec_t bits) : re(bits), im(bits) {}

  void set(std::complex<double> z) {
    re.set(z.real());
    im.set(z.imag());
  }
  void set_one() {
    mpfr_set_ui(re.get(), 1, MPFR_RNDN);
    mpfr_set_zero(im.get(), 1);
  }
  std::complex<double> to_complex() const {
    return {re.to_double(), im.to_double()};
  }
  double log2_abs() const {
    const double a = re.log2_abs();
    const double b = im.log2_abs();
    const double hi = std::max(a, b);
    if (std::isinf(hi)) return hi;
    const double lo = std::min(a, b);
    return hi + 0.5 * std::log2(1.0 + std::exp2(2.0 * (lo - hi)));
  }
};

/// out = a * b. `out` must not alias `a` or `b`.
inline void mul(MpComplex& out, const MpComplex& a, const MpComplex& b,
                MpReal& scratch) {
  mpfr_mul(out.re.get(), a.re.get(), b.re.get(), MPFR_RNDN);
  mpfr_mul(scratch.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  mpfr_sub(out.re.get(), out.re.get(), scratch.get(), MPFR_RNDN);
  mpfr_mul(out.im.get(), a.re.get(), b.im.get(), MPFR_RNDN);
  mpfr_mul(scratch.get(), a.im.get(), b.re.get(), MPFR_RNDN);
  mpfr_add(out.im.get(), out.im.get(), scratch.get(), MPFR_RNDN);
}

inline void add_to(MpComplex& acc, const MpComplex& x) {
  mpfr_add(acc.re.get(), acc.re.get(), x.re.get(), MPFR_RNDN);
  mpfr_add(acc.im.get(), acc.im.get(), x.im.get(), MPFR_RNDN);
}

/// acc += n * x, using `tmp` as scratch.
inline void add_scaled_to(MpComplex& acc, const MpComplex& x, unsigned long n,
                          MpComplex& tmp) {
  mpfr_mul_ui(tmp.re.get(), x.re.get(), n, MPFR_RNDN);
  mpfr_mul_ui(tmp.im.get(), x.im.get(), n, MPFR_RNDN);
  add_to(acc, tmp);
}

inline void swap(MpComplex& a, MpComplex& b) {
  mpfr_swap(a.re.get(), b.re.get());
  mpfr_swap(a.im.get(), b.im.get());
}

/// Working precision for a sum whose largest term is 2^max_log2_term while
/// the result is expected near 2^result_log2: keep ~64 good bits after the
/// cancellation.
inline mpfr_prec_t precision_for(double max_log2_term, double result_log2) {
  const double loss = std::max(0.0, max_log2_term - result_log2);
  return static_cast<mpfr_prec_t>(std::ceil(loss)) + 80;
}

}  // namespace kasner::detail
