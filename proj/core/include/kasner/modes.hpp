#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "kasner/exponents.hpp"
#include "kasner/integrate.hpp"

namespace kasner {

/// Initial data (alpha(t0), alpha'(t0)) of a single Fourier mode.
struct ModeSpec {
  Momentum w;
  double t0 = 1.0;
  cplx alpha0;
  cplx alphadot0;
};

enum class Coordinate { PhysicalTime, LogTime };

/// Samples of a mode solution on a geometric grid in t (uniform in s).
///
/// The trajectory keeps the coordinate it was solved in and presents its
/// samples in a view coordinate. Converting only changes the view, so
/// round trips reproduce the stored samples exactly.
class ModeTrajectory {
 public:
  Coordinate native() const { return data_->native; }
  Coordinate coordinate() const { return view_; }
  const KasnerExponents& exponents() const { return data_->k; }
  const ModeSpec& spec() const { return data_->spec; }

  std::size_t size() const { return data_->x.size(); }
  /// Sample abscissa in the view coordinate (t or s).
  double abscissa(std::size_t i) const;
  /// Value and derivative with respect to the view coordinate.
  cplx value(std::size_t i) const { return data_->value[i]; }
  cplx derivative(std::size_t i) const;

  /// Dense evaluation at x in the view coordinate.
  std::pair<cplx, cplx> evaluate(double x) const;
  /// alpha(t), alpha'(t) regardless of the view.
  std::pair<cplx, cplx> alpha(double t) const;
  /// beta(s), beta'(s) regardless of the view.
  std::pair<cplx, cplx> beta(double s) const;

  /// Covered range in the view coordinate, ordered as integrated.
  double front() const { return abscissa(0); }
  double back() const { return abscissa(size() - 1); }
  /// Covered range in t, ascending.
  double t_min() const;
  double t_max() const;

  const SampledSolution& solution() const { return data_->solution; }

 private:
  struct Data {
    KasnerExponents k;
    ModeSpec spec;
    Coordinate native;
    SampledSolution solution;
    std::vector<double> x;  // native abscissae
    std::vector<cplx> value;
    std::vector<cplx> deriv;  // native derivative
  };

  ModeTrajectory(std::shared_ptr<const Data> data, Coordinate view)
      : data_(std::move(data)), view_(view) {}

  friend ModeTrajectory solve_mode_t(const KasnerExponents&, const ModeSpec&, double,
                                     double, double);
  friend ModeTrajectory solve_mode_s(const KasnerExponents&, const ModeSpec&, double,
                                     double, double);
  friend ModeTrajectory convert_trajectory(const ModeTrajectory&, Coordinate);

  std::shared_ptr<const Data> data_;
  Coordinate view_;
};

inline constexpr double kDefaultSamplesPerDecade = 512.0;

/// alpha'' + alpha'/t + 4 pi^2 sum_j w_j^2 t^{-2 p_j} alpha = 0 from t0 to
/// t_end (either side of t0). Spans reaching below 1e-8 t0 throw DomainLimit;
/// use solve_mode_s there.
ModeTrajectory solve_mode_t(const KasnerExponents& k, const ModeSpec& spec, double t_end,
                            double tol = 1e-10,
                            double samples_per_decade = kDefaultSamplesPerDecade);

/// beta'' + K(s) beta = 0 from s = ln t0 to s_end, with beta(ln t0) = alpha0
/// and beta'(ln t0) = t0 alphadot0.
ModeTrajectory solve_mode_s(const KasnerExponents& k, const ModeSpec& spec, double s_end,
                            double tol = 1e-10,
                            double samples_per_decade = kDefaultSamplesPerDecade);

/// Same samples presented in another coordinate (alpha(t) = beta(ln t),
/// alpha'(t) = beta'(ln t) / t).
ModeTrajectory convert_trajectory(const ModeTrajectory& traj, Coordinate target);

enum class Part { Auto, Real, Imag };

struct EnergySample {
  double s;
  double E;
};

/// E(s) = beta'^2 + K(s) beta^2 for the selected real part of the solution.
/// Part::Auto accepts only real trajectories and throws ComplexInput
/// otherwise.
std::vector<EnergySample> energy_functional(const ModeTrajectory& traj,
                                            Part part = Part::Auto);

}  // namespace kasner
