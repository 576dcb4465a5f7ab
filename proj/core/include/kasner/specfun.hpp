#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace kasner {

using cplx = std::complex<double>;

/// Value and first derivative of a series-evaluated function.
struct SeriesResult {
  cplx value;
  cplx derivative;
  std::size_t terms_used = 0;
  /// Estimated relative size of the discarded tail.
  double truncation_estimate = 0.0;
};

/// log Gamma(z) continued analytically from the positive real axis (the
/// convention of mpmath.loggamma / scipy.special.loggamma), with the cut on
/// the negative real axis. Throws PoleError at non-positive integers.
cplx log_gamma(cplx z);

/// Bessel function of the first kind J_nu(x) for complex order and x > 0.
/// Large x uses the Hankel expansion when it converges to tol; otherwise the
/// ascending series, with working precision growing in x so the result
/// keeps double accuracy despite cancellation between terms.
SeriesResult bessel_j(cplx nu, double x, double tol = 1e-16);

/// Bessel function of the second kind, with the same large-x path as
/// bessel_j. Otherwise nu = 0 uses the logarithmic series;
/// non-integer nu uses (J_nu cos(nu pi) - J_{-nu}) / sin(nu pi). Nonzero
/// integer orders throw IntegerOrderUnsupported.
SeriesResult bessel_y(cplx nu, double x, double tol = 1e-16);

/// HeunB(0, 0, 0, delta, x): the entire solution of
///   x y'' + (1 - 2 x^2) y' - (2 x + delta/2) y = 0,  y(0) = 1, y'(0) = delta/2,
/// summed from its power series (m+1)^2 a_{m+1} = (delta/2) a_m + 2 m a_{m-1}.
SeriesResult heun_b(cplx delta, cplx x, double tol = 1e-16);

/// Same as heun_b but skips the derivative sum.
cplx heun_b_value(cplx delta, cplx x, double tol = 1e-16);

/// Evaluates HeunB(0, 0, 0, delta, .) at many nearby points. Points near a
/// cached center reuse the Taylor expansion about it, generated from the
/// differential equation in double precision. New centers are reached by
/// short chains of such steps and re-anchored to heun_b every 256 steps. Holds a cache, so one instance must not be shared
/// between threads.
class HeunBContinuation {
 public:
  explicit HeunBContinuation(cplx delta) : delta_(delta) {}

  SeriesResult eval(cplx x);
  std::size_t centers_computed() const { return computed_; }

 private:
  struct Center {
    cplx x;
    cplx y;
    cplx dy;
    double radius;
    int depth;  // Taylor steps from the last exact centre
  };

  bool expand(const Center& c, cplx x, SeriesResult& out) const;

  cplx delta_;
  std::vector<Center> centers_;
  std::size_t computed_ = 0;
};

}  // namespace kasner
