#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kasner {

using cplx = std::complex<double>;

/// Right-hand side of a real first-order system y' = F(t, y).
using SystemRhs =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 5'000'000;
  /// Zero selects the step automatically.
  double initial_step = 0.0;
  /// Zero means unbounded.
  double max_step = 0.0;
  /// Components sharing a group id are measured together in the error norm
  /// (Euclidean norm within the group, RMS across groups). Empty means one
  /// group per component.
  std::vector<int> groups;
};

/// Accepted steps of a Dormand-Prince 5(4) run together with their
/// continuous extension. Step boundaries are strictly monotone in the
/// integration direction, which may be decreasing.
class DenseSolution {
 public:
  std::size_t dimension() const { return dim_; }
  double t_start() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  std::size_t accepted_steps() const { return t_.size() - 1; }
  std::size_t rejected_steps() const { return rejected_; }

  /// Boundaries of the accepted steps, including the start point.
  const std::vector<double>& nodes() const { return t_; }
  /// State stored at node i.
  std::span<const double> node_state(std::size_t i) const;

  /// Dense output; t must lie inside [t_start, t_end] (either order).
  void state(double t, std::span<double> out) const;
  std::vector<double> state(double t) const;

 private:
  friend DenseSolution dopri5(const SystemRhs&, double, std::vector<double>,
                              double, const SolverOptions&);

  std::size_t locate(double t) const;

  std::size_t dim_ = 0;
  std::size_t rejected_ = 0;
  std::vector<double> t_;
  std::vector<double> y_;      // dim_ values per node
  std::vector<double> coeff_;  // 4 * dim_ interpolation coefficients per step
};

/// Integrates y' = F(t, y) from t0 to t_end with an embedded 5(4) pair and
/// PI step-size control. Throws StepUnderflow when the step collapses below
/// round-off of t and MaxStepsExceeded past options.max_steps.
DenseSolution dopri5(const SystemRhs& rhs, double t0, std::vector<double> y0,
                     double t_end, const SolverOptions& options);

/// Complex linear second-order problem y'' + a(t) y' + b(t) y = c(t).
struct IVPProblem {
  std::function<cplx(double)> a;
  std::function<cplx(double)> b;
  /// Empty means c == 0.
  std::function<cplx(double)> c;
  double t0 = 0.0;
  cplx y0;
  cplx dy0;
  double t_end = 0.0;
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Solution of an IVPProblem: complex value and derivative at the step
/// nodes, with dense evaluation in between.
class SampledSolution {
 public:
  explicit SampledSolution(DenseSolution dense) : dense_(std::move(dense)) {}

  double t_start() const { return dense_.t_start(); }
  double t_end() const { return dense_.t_end(); }
  const std::vector<double>& points() const { return dense_.nodes(); }

  cplx value_at_node(std::size_t i) const;
  cplx derivative_at_node(std::size_t i) const;

  cplx value(double t) const;
  cplx derivative(double t) const;
  /// Value and derivative from a single dense evaluation.
  std::pair<cplx, cplx> evaluate(double t) const;

  std::size_t accepted_steps() const { return dense_.accepted_steps(); }
  std::size_t rejected_steps() const { return dense_.rejected_steps(); }
  const DenseSolution& dense() const { return dense_; }

 private:
  DenseSolution dense_;
};

/// Value and derivative are separate error groups, each measured by the
/// modulus of the complex quantity.
SampledSolution solve_ivp(const IVPProblem& problem);

/// Adaptive Simpson quadrature with recursion depth capped at 60.
/// Guarantees (heuristically) |result - integral| <= tol (1 + |result|), down
/// to a round-off floor near 2e-13 of the integral of |f|.
/// Throws MaxDepthExceeded when an interval cannot be resolved.
double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double tol);

/// Complex-valued integrand of a real variable. Non-finite integrand values
/// raise IntegrandSingular.
cplx complex_path_quad(const std::function<cplx(double)>& f, double a, double b,
                       double tol);

}  // namespace kasner
