#include "skelstat/sphere.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <limits>

namespace skelstat {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

UnitVec3 initial_mean_guess(const std::vector<UnitVec3>& points) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : points) sum += p;
  if (sum.norm() < 1e-12 * static_cast<double>(points.size())) return points.front();
  return sum.normalized();
}

}  // namespace

double frechet_objective(const std::vector<UnitVec3>& points, const UnitVec3& mean) {
  double f = 0.0;
  for (const auto& p : points) {
    const double d = geodesic_dist(mean, p);
    f += d * d;
  }
  return f;
}

UnitVec3 frechet_mean_s2(const std::vector<UnitVec3>& points, const FrechetOptions& options) {
  if (points.empty()) throw ValidationError("frechet_mean_s2: empty input");
  if (points.size() == 1) return points.front().normalized();

  UnitVec3 mu = initial_mean_guess(points);
  const double inv_n = 1.0 / static_cast<double>(points.size());
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    for (const auto& p : points) step += log_map(mu, p);
    step *= inv_n;
    mu = exp_map(mu, step);
    if (step.norm() < options.tolerance) return mu;
  }
  throw ConvergenceError("frechet_mean_s2: no convergence", mu, frechet_objective(points, mu));
}

double circular_frechet_mean(const std::vector<double>& angles) {
  if (angles.empty()) throw ValidationError("circular_frechet_mean: empty input");
  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  double mu = (std::hypot(s, c) > 1e-12) ? std::atan2(s, c) : angles.front();
  const double inv_n = 1.0 / static_cast<double>(angles.size());
  for (int it = 0; it < 100; ++it) {
    double step = 0.0;
    for (double a : angles) step += wrap_angle(a - mu);
    step *= inv_n;
    mu = wrap_angle(mu + step);
    if (std::abs(step) < 1e-15) break;
  }
  return mu;
}

double circle_objective(const std::vector<UnitVec3>& points, const UnitVec3& axis, double radius_angle) {
  double f = 0.0;
  for (const auto& p : points) {
    const double e = geodesic_dist(axis, p) - radius_angle;
    f += e * e;
  }
  return f;
}

namespace {

struct CircleCandidate {
  UnitVec3 axis;
  double radius = kHalfPi;
  double objective = std::numeric_limits<double>::infinity();
};

// Levenberg-Marquardt on the axis. For small circles r is eliminated
// (variable projection: r = mean colatitude); for great circles r = pi/2.
CircleCandidate refine_circle(const std::vector<UnitVec3>& points, UnitVec3 axis, bool great,
                              int max_iterations) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd theta(n);
  Eigen::Matrix<double, Eigen::Dynamic, 2> jac(n, 2);

  // Small circles: the axis is flipped so that the mean colatitude is at most pi/2.
  auto evaluate = [&](UnitVec3& a, double& radius) {
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = geodesic_dist(a, points[static_cast<size_t>(i)]);
    if (!great && theta.mean() > kHalfPi) {
      a = -a;
      theta = std::numbers::pi - theta.array();
    }
    radius = great ? kHalfPi : std::clamp(theta.mean(), 1e-12, kHalfPi);
    return (theta.array() - radius).square().sum();
  };

  double radius = 0.0;
  double f = evaluate(axis, radius);
  double lambda = 1e-3;

  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Vector3d t1 = any_orthogonal(axis);
    const Eigen::Vector3d t2 = axis.cross(t1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& x = points[static_cast<size_t>(i)];
      const double s = std::max(std::sin(theta[i]), 1e-12);
      jac(i, 0) = -x.dot(t1) / s;
      jac(i, 1) = -x.dot(t2) / s;
    }
    Eigen::VectorXd resid = theta.array() - radius;
    if (!great) {
      const Eigen::RowVector2d mj = jac.colwise().mean();
      jac.rowwise() -= mj;
      resid.array() -= resid.mean();
    }
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jte = jac.transpose() * resid;
    if (jte.norm() < 1e-15 * std::max(1.0, f)) break;

    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix2d a = jtj;
      a.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      const Eigen::Vector2d delta = -a.partialPivLu().solve(jte);
      UnitVec3 trial = exp_map(axis, (delta[0] * t1 + delta[1] * t2).eval());
      double trial_radius = 0.0;
      const double ft = evaluate(trial, trial_radius);
      if (ft < f) {
        const double gain = f - ft;
        axis = trial;
        radius = trial_radius;
        f = ft;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (delta.norm() < 1e-12 || gain <= 1e-12 * f) it = max_iterations;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {axis, radius, f};
}

std::vector<UnitVec3> starting_axes(const std::vector<UnitVec3>& points) {
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) scatter += p * p.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  const Eigen::Vector3d e_small = es.eigenvectors().col(0);
  const Eigen::Vector3d e_mid = es.eigenvectors().col(1);
  const Eigen::Vector3d e_large = es.eigenvectors().col(2);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean = mean.norm() > 1e-12 ? mean.normalized() : e_large;

  std::array<Eigen::Vector3d, 8> raw = {mean,
                                        e_small,
                                        e_mid,
                                        e_large,
                                        mean + e_small,
                                        mean - e_small,
                                        e_small + e_mid,
                                        e_small - e_mid};
  std::vector<UnitVec3> out;
  for (auto& v : raw) {
    if (v.norm() > 1e-9) out.push_back(v.normalized());
  }
  return out;
}

void check_circle_input(const std::vector<UnitVec3>& points) {
  if (points.size() < 3) throw ValidationError("circle fit needs at least 3 points");
  double spread = 0.0;
  for (const auto& p : points) spread = std::max(spread, geodesic_dist(points.front(), p));
  if (spread < 1e-14) throw NumericalError("circle fit: degenerate input (all points identical)");
}

FittedCircle best_fit(const std::vector<UnitVec3>& points, bool great, const CircleFitOptions& options) {
  // Short runs from every start, then the best one is refined to convergence.
  constexpr int kScreenIterations = 15;
  CircleCandidate best;
  for (const auto& start : starting_axes(points)) {
    CircleCandidate c = refine_circle(points, start, great, std::min(kScreenIterations, options.max_iterations));
    if (c.objective < best.objective) best = c;
  }
  if (options.max_iterations > kScreenIterations) {
    CircleCandidate c = refine_circle(points, best.axis, great, options.max_iterations - kScreenIterations);
    if (c.objective <= best.objective) best = c;
  }
  FittedCircle out;
  out.axis = best.axis;
  out.radius_angle = great ? kHalfPi : best.radius;
  out.is_great = great || std::abs(best.radius - kHalfPi) < 1e-9;
  if (out.is_great) out.radius_angle = kHalfPi;
  out.mean_sq_residual = best.objective / static_cast<double>(points.size());
  return out;
}

}  // namespace

FittedCircle fit_small_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options) {
  check_circle_input(points);
  return best_fit(points, false, options);
}

FittedCircle fit_great_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options) {
  check_circle_input(points);
  return best_fit(points, true, options);
}

FittedCircle fit_circle_s2(const std::vector<UnitVec3>& points, const CircleFitOptions& options) {
  check_circle_input(points);
  const FittedCircle great = best_fit(points, true, options);
  const FittedCircle small = best_fit(points, false, options);

  const double gain = great.mean_sq_residual - small.mean_sq_residual;
  const double spread = std::sqrt(small.mean_sq_residual);
  const bool choose_small = gain > options.min_small_gain * great.mean_sq_residual &&
                            small.radius_angle < kHalfPi - options.great_margin &&
                            spread <= options.max_ring_spread * small.radius_angle;
  return choose_small ? small : great;
}

PnsResult euclideanize_pns(const std::vector<UnitVec3>& points, const CircleFitOptions& options) {
  PnsResult out;
  out.circle = fit_circle_s2(points, options);
  const UnitVec3& a = out.circle.axis;
  const double r = out.circle.radius_angle;
  const auto n = points.size();

  // Longitudes about the axis, measured from a fixed reference direction.
  const Eigen::Vector3d ref = any_orthogonal(a);
  const Eigen::Vector3d ref2 = a.cross(ref);
  std::vector<double> longitude(n);
  for (size_t i = 0; i < n; ++i) longitude[i] = std::atan2(points[i].dot(ref2), points[i].dot(ref));
  const double mean_lon = circular_frechet_mean(longitude);

  out.residuals.resize(static_cast<Eigen::Index>(n), 2);
  const double arc_scale = std::sin(r);
  for (size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out.residuals(row, 0) = geodesic_dist(a, points[i]) - r;
    out.residuals(row, 1) = arc_scale * wrap_angle(longitude[i] - mean_lon);
  }
  const Eigen::Vector3d w = std::cos(mean_lon) * ref + std::sin(mean_lon) * ref2;
  out.base_point = (std::cos(r) * a + std::sin(r) * w).normalized();
  return out;
}

TangentResult euclideanize_tangent(const std::vector<UnitVec3>& points) {
  TangentResult out;
  out.base_point = frechet_mean_s2(points);
  const Eigen::Matrix3d rot = rotate_x_to_y_or(out.base_point, kNorthPole, Eigen::Vector3d::UnitX());
  out.coords.resize(static_cast<Eigen::Index>(points.size()), 2);
  for (size_t i = 0; i < points.size(); ++i) {
    out.coords.row(static_cast<Eigen::Index>(i)) = log_map_north((rot * points[i]).eval()).transpose();
  }
  return out;
}

}  // namespace skelstat
