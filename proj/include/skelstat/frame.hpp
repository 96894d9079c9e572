#ifndef SKELSTAT_FRAME_HPP
#define SKELSTAT_FRAME_HPP

#include <Eigen/Core>

#include "skelstat/sphere.hpp"

namespace skelstat {

/// Ordered orthonormal triple (n, b, b_perp), stored as the columns of a
/// 3x3 matrix. A proper frame has b_perp = n x b (det +1).
template <typename Scalar>
struct FrameT {
  Mat3<Scalar> axes = canonical().axes;

  FrameT() = default;
  explicit FrameT(const Mat3<Scalar>& m) : axes(m) {}
  FrameT(const Vec3<Scalar>& n, const Vec3<Scalar>& b, const Vec3<Scalar>& b_perp) {
    axes.col(0) = n;
    axes.col(1) = b;
    axes.col(2) = b_perp;
  }

  /// I~ = (e3, e1, e2).
  static FrameT canonical() {
    Mat3<Scalar> m;
    m << 0, 1, 0,  //
        0, 0, 1,   //
        1, 0, 0;
    return FrameT(m);
  }

  /// Proper frame from a normal and a tangent direction; b_perp = n x b.
  static FrameT from_normal_tangent(const Vec3<Scalar>& n, const Vec3<Scalar>& b) {
    return FrameT(n, b, n.cross(b));
  }

  auto n() const { return axes.col(0); }
  auto b() const { return axes.col(1); }
  auto b_perp() const { return axes.col(2); }
  auto axis(int i) const { return axes.col(i); }

  /// Max deviation from orthonormality and from b_perp = n x b.
  Scalar orthonormality_error() const {
    const Scalar ortho = (axes.transpose() * axes - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    const Scalar hand = (Vec3<Scalar>(n().cross(b())) - Vec3<Scalar>(b_perp())).cwiseAbs().maxCoeff();
    return std::max(ortho, hand);
  }

  bool is_valid(Scalar tol = Scalar(1e-9)) const { return orthonormality_error() < tol; }

  friend FrameT operator*(const Mat3<Scalar>& r, const FrameT& f) { return FrameT(Mat3<Scalar>(r * f.axes)); }
};

using Frame = FrameT<double>;

/// Rotation M = R2 R1 that aligns `parent` to I~: R1 = R(n, e3),
/// R2 = R(R1 b, e1). R2 fixes e3, since R1 b lies on the equator. Antipodal
/// cases (n = -e3, R1 b = -e1) are resolved by the half turn about the
/// orthogonal coordinate axis, which is the unique choice that keeps the
/// second step on the equator.
Eigen::Matrix3d align_to_canonical(const Frame& parent);

/// Whether M * parent has its third axis at -e2 (a left-handed parent).
bool aligned_is_reflected(const Eigen::Matrix3d& alignment, const Frame& parent);

/// Express `child` (global) in the coordinate system of `parent` (global):
/// F* = R2 R1 F~, with the (1, 1, -1) column adjustment when the aligned
/// parent is (e3, e1, -e2).
Frame express_in_parent(const Frame& parent, const Frame& child);

/// Inverse of express_in_parent for a proper parent: [R2 R1]^-1 F*.
Frame frame_from_parent(const Frame& parent, const Frame& local);

/// Sum over the three axes of squared geodesic distances.
double frame_sq_distance(const Frame& a, const Frame& b);

}  // namespace skelstat

#endif  // SKELSTAT_FRAME_HPP
