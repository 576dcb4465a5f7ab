#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kasner/exponents.hpp"

namespace kasner {

using Vec3 = std::array<double, 3>;

struct GeodesicInit {
  double t0 = 1.0;
  Vec3 x0{};
  /// Initial spatial direction dx/ds (coordinate components).
  Vec3 v{};
};

/// Future-pointing null tangent at t0 and the conserved momenta
/// a_j = t0^{2 p_j} v_j.
struct NullTangent {
  double dt = 0.0;
  Vec3 dx{};
  Vec3 a{};
};

/// dt/ds = (sum_j v_j^2 t0^{2 p_j})^{1/2}, which makes the tangent null.
/// Throws ZeroDirection for v = 0.
NullTangent init_lightlike(const KasnerExponents& k, const GeodesicInit& init);

struct GeodesicSample {
  double s = 0.0;
  double t = 0.0;
  Vec3 x{};
  double dt = 0.0;
  Vec3 dx{};
  /// <gamma', gamma'> divided by (dt/ds)^2.
  double null_deviation = 0.0;
  /// max_j |t^{2 p_j} dx_j/ds - a_j| divided by max_j |a_j|.
  double momentum_drift = 0.0;
};

struct GeodesicRecord {
  Vec3 a{};
  double tol = 0.0;
  std::vector<GeodesicSample> samples;
  double max_null_deviation = 0.0;
  double max_momentum_drift = 0.0;
  std::size_t accepted_steps = 0;
};

/// Integrates the second-order geodesic equations
///   t''   = -sum_j p_j t^{2 p_j - 1} (x_j')^2,
///   x_j'' = -2 (p_j / t) t' x_j'
/// from s = 0 to s_end and records `samples` equally spaced points. tol is
/// the accuracy asked of the recorded state; the stepper runs with local
/// relative tolerance tol / 100. Conservation of the null norm and of the
/// momenta is measured on the result, not imposed.
GeodesicRecord integrate_geodesic(const KasnerExponents& k, const GeodesicInit& init,
                                  double s_end, double tol = 1e-10,
                                  std::size_t samples = 513);

/// Affine parameter at which t reaches T: int_{t0}^{T} dt / E(t).
double affine_parameter_at(const KasnerExponents& k, const Vec3& a, double t0, double T,
                           double tol = 1e-13);

/// E = dt/ds = (sum_j a_j^2 / t^{2 p_j})^{1/2}; the same expression as
/// frequency_f. Throws ZeroMomentum for a = 0.
double energy(const KasnerExponents& k, const Vec3& a, double t);

struct Wavelengths {
  double lambda_E;   // h / E
  double lambda_LT;  // 1 / f
};

Wavelengths wavelengths(const KasnerExponents& k, const Vec3& a, double t, double h = 1.0);

struct RedshiftReport {
  double t_p = 0.0;
  double t_q = 0.0;
  double h = 1.0;
  Wavelengths at_p{};
  Wavelengths at_q{};
  double z_energy = 0.0;
  double z_large_time = 0.0;
  double z_formula = 0.0;
  /// Pairwise |z_a - z_b| / (1 + |z_b|).
  double dev_energy_large_time = 0.0;
  double dev_energy_formula = 0.0;
  double dev_large_time_formula = 0.0;
  double max_deviation() const;
};

/// Redshift between emission at t_p and reception at t_q along a ray with
/// momenta a, computed from both wavelength notions and from
/// z = (sum a^2 t_p^{-2p} / sum a^2 t_q^{-2p})^{1/2} - 1.
/// Throws BadOrdering unless 0 < t_p < t_q.
RedshiftReport redshift(const KasnerExponents& k, const Vec3& a, double t_p, double t_q,
                        double h = 1.0);

}  // namespace kasner
