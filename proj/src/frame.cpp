#include "skelstat/frame.hpp"

namespace skelstat {

Eigen::Matrix3d align_to_canonical(const Frame& parent) {
  const Eigen::Matrix3d r1 = rotate_x_to_y_or(parent.n(), kNorthPole, Eigen::Vector3d::UnitX());
  const Eigen::Vector3d b1 = r1 * parent.b();
  const Eigen::Matrix3d r2 = rotate_x_to_y_or(b1, Eigen::Vector3d::UnitX(), kNorthPole);
  return r2 * r1;
}

bool aligned_is_reflected(const Eigen::Matrix3d& alignment, const Frame& parent) {
  return (alignment * parent.b_perp()).dot(Eigen::Vector3d::UnitY()) < 0;
}

Frame express_in_parent(const Frame& parent, const Frame& child) {
  const Eigen::Matrix3d m = align_to_canonical(parent);
  Frame out = m * child;
  if (aligned_is_reflected(m, parent)) out.axes.col(2) = -out.axes.col(2);
  return out;
}

Frame frame_from_parent(const Frame& parent, const Frame& local) {
  const Eigen::Matrix3d m = align_to_canonical(parent);
  return Frame(Eigen::Matrix3d(m.transpose() * local.axes));
}

double frame_sq_distance(const Frame& a, const Frame& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = geodesic_dist(a.axis(i), b.axis(i));
    s += d * d;
  }
  return s;
}

}  // namespace skelstat
