#ifndef SKELSTAT_SPHERE_HPP
#define SKELSTAT_SPHERE_HPP

// Geometry on the unit sphere S^2: geodesics, the spherical rotation
// matrix, Log/Exp maps, Frechet means, circle fitting (PNS on S^2) and
// euclideanization of directional samples.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <vector>

#include "skelstat/error.hpp"

namespace skelstat {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Rows are samples. Used for euclideanized directions (2 columns) and
/// point configurations (3 columns).
using Samples2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Samples3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

using UnitVec3 = Eigen::Vector3d;
using TangentVec2 = Eigen::Vector2d;

inline const Eigen::Vector3d kNorthPole = Eigen::Vector3d::UnitZ();

/// Great-circle distance in [0, pi]. Uses atan2(|x cross y|, x.y), which
/// equals arccos(clamp(x.y)) but keeps full precision near 0 and pi.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar geodesic_dist(const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedY>& y) {
  using std::atan2;
  return atan2(x.cross(y).norm(), x.dot(y));
}

/// Rotation by `angle` (right-hand rule) about the unit `axis`.
template <typename Derived>
Mat3<typename Derived::Scalar> axis_rotation(const Eigen::MatrixBase<Derived>& axis,
                                              typename Derived::Scalar angle) {
  using Scalar = typename Derived::Scalar;
  return Eigen::AngleAxis<Scalar>(angle, axis.normalized()).toRotationMatrix();
}

namespace detail {
template <typename Scalar>
constexpr Scalar antipodal_tol() {
  return Scalar(1e-12);
}
}  // namespace detail

/// Spherical rotation matrix R(x, y) taking x to y along the shortest
/// geodesic:
///   R = I + sin(a)(y w^T - w y^T) + (cos(a) - 1)(y y^T + w w^T),
///   w = (x - y(y^T x)) / |x - y(y^T x)|,  a = arccos(y^T x).
/// Returns the identity when x == y. Throws NumericalError when x == -y.
template <typename DerivedX, typename DerivedY>
Mat3<typename DerivedX::Scalar> rotate_x_to_y(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Vec3<Scalar> xv = x;
  const Vec3<Scalar> yv = y;
  const Scalar c = yv.dot(xv);
  const Vec3<Scalar> perp = xv - yv * c;
  const Scalar perp_norm = perp.norm();
  if (perp_norm < detail::antipodal_tol<Scalar>()) {
    if (c > 0) return Mat3<Scalar>::Identity();
    throw NumericalError("antipodal rotation undefined");
  }
  const Vec3<Scalar> w = perp / perp_norm;
  const Scalar alpha = std::atan2(perp_norm, c);
  return Mat3<Scalar>::Identity() +
         std::sin(alpha) * (yv * w.transpose() - w * yv.transpose()) +
         (std::cos(alpha) - Scalar(1)) * (yv * yv.transpose() + w * w.transpose());
}

/// As rotate_x_to_y, but an antipodal pair is resolved by a half turn about
/// `fallback_axis`, which must be orthogonal to x.
template <typename DerivedX, typename DerivedY, typename DerivedA>
Mat3<typename DerivedX::Scalar> rotate_x_to_y_or(const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedY>& y,
                                                  const Eigen::MatrixBase<DerivedA>& fallback_axis) {
  using Scalar = typename DerivedX::Scalar;
  const Vec3<Scalar> perp = x - y * y.dot(x);
  if (perp.norm() < detail::antipodal_tol<Scalar>() && y.dot(x) < 0) {
    return axis_rotation(fallback_axis, std::numbers::pi_v<Scalar>);
  }
  return rotate_x_to_y(x, y);
}

/// Any unit vector orthogonal to v.
template <typename Derived>
Vec3<typename Derived::Scalar> any_orthogonal(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Vec3<Scalar> helper = std::abs(v.x()) < Scalar(0.9) ? Vec3<Scalar>::UnitX() : Vec3<Scalar>::UnitY();
  return v.cross(helper).normalized();
}

/// Log map at an arbitrary base point p. The result is tangent at p and
/// has length d_g(p, x). Throws at the cut locus x == -p.
template <typename DerivedP, typename DerivedX>
Vec3<typename DerivedP::Scalar> log_map(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedP::Scalar;
  const Scalar c = p.dot(x);
  const Vec3<Scalar> perp = x - p * c;
  const Scalar s = perp.norm();
  if (s == Scalar(0)) {
    if (c > 0) return Vec3<Scalar>::Zero();
    throw NumericalError("log map undefined at cut locus");
  }
  const Scalar theta = std::atan2(s, c);
  return perp * (theta / s);
}

/// Exp map at p of the tangent vector v.
template <typename DerivedP, typename DerivedV>
Vec3<typename DerivedP::Scalar> exp_map(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedP::Scalar;
  const Scalar t = v.norm();
  if (t == Scalar(0)) return p;
  Vec3<Scalar> out = std::cos(t) * p + (std::sin(t) / t) * v;
  return out.normalized();
}

/// Log map at the north pole q = (0,0,1) in tangent coordinates:
///   Log_q(v) = (v1 theta/sin(theta), v2 theta/sin(theta)), theta = arccos(v.q).
/// theta/sin(theta) -> 1 at theta = 0. Throws at v == -q.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> log_map_north(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar s = std::hypot(v.x(), v.y());
  if (s == Scalar(0)) {
    if (v.z() > 0) return Eigen::Matrix<Scalar, 2, 1>::Zero();
    throw NumericalError("log map undefined at cut locus");
  }
  const Scalar theta = std::atan2(s, v.z());
  return Eigen::Matrix<Scalar, 2, 1>(v.x(), v.y()) * (theta / s);
}

/// Inverse of log_map_north.
template <typename Derived>
Vec3<typename Derived::Scalar> exp_map_north(const Eigen::MatrixBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  return exp_map(Vec3<Scalar>::UnitZ(), Vec3<Scalar>(t.x(), t.y(), Scalar(0)));
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

// ---------------------------------------------------------------------------
// Sample-level operations (double precision).

struct FrechetOptions {
  double tolerance = 1e-12;  // stop when the update angle falls below this
  int max_iterations = 1000;
};

/// Frechet mean on S^2 by iterative tangent-space averaging.
/// Throws ValidationError on empty input and ConvergenceError (carrying the
/// last iterate) when the iteration cap is reached.
UnitVec3 frechet_mean_s2(const std::vector<UnitVec3>& points, const FrechetOptions& options = {});

/// Sum of squared geodesic distances from `mean` to `points`.
double frechet_objective(const std::vector<UnitVec3>& points, const UnitVec3& mean);

/// Intrinsic mean of angles on the circle, in (-pi, pi].
double circular_frechet_mean(const std::vector<double>& angles);

struct FittedCircle {
  UnitVec3 axis = kNorthPole;
  double radius_angle = std::numbers::pi / 2;  // in (0, pi/2]
  bool is_great = true;
  double mean_sq_residual = 0.0;
};

struct CircleFitOptions {
  /// Small circle is chosen only if it lowers the mean squared residual of
  /// the great circle by more than this fraction...
  double min_small_gain = 0.05;
  /// ...and its radius stays below pi/2 minus this margin...
  double great_margin = 0.05;
  /// ...and the sample actually forms a ring: the spread of the distances
  /// to the axis must not exceed this fraction of the radius. An isotropic
  /// cluster gives about 0.52 (Rayleigh), a ring much less.
  double max_ring_spread = 0.35;
  int max_iterations = 200;
};

/// Least-squares circle fit on S^2 with the great/small decision applied.
/// Objective: sum_i (d_g(axis, x_i) - r)^2.
FittedCircle fit_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options = {});

/// Best unconstrained small circle (r in (0, pi/2]); no decision rule.
FittedCircle fit_small_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options = {});

/// Best great circle (r = pi/2).
FittedCircle fit_great_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options = {});

/// Sum of squared residuals of `points` against a circle (axis, r).
double circle_objective(const std::vector<UnitVec3>& points, const UnitVec3& axis, double radius_angle);

struct PnsResult {
  FittedCircle circle;
  /// Column 0: signed distance to the circle, d_g(axis, x) - r (positive
  /// away from the axis). Column 1: signed arc length (right-hand rule about
  /// the axis) from the PNS mean to the projection, scaled by sin(r).
  Samples2 residuals;
  UnitVec3 base_point;  // PNS mean: circular Frechet mean of projections
};

/// PNS euclideanization on S^2. Needs at least 3 points.
PnsResult euclideanize_pns(const std::vector<UnitVec3>& points, const CircleFitOptions& options = {});

struct TangentResult {
  Samples2 coords;
  UnitVec3 base_point;  // Frechet mean
};

/// Rotate the sample so its Frechet mean sits at the north pole, then take
/// Log_q of every point.
TangentResult euclideanize_tangent(const std::vector<UnitVec3>& points);

}  // namespace skelstat

#endif  // SKELSTAT_SPHERE_HPP
