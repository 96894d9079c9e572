#ifndef SKELSTAT_REPARAM_HPP
#define SKELSTAT_REPARAM_HPP

#include <optional>

#include "skelstat/dsrep.hpp"
#include "skelstat/hierarchy.hpp"

namespace skelstat {

struct RigidMotion {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

/// x -> R x + t on skeletal points; spoke directions are rotated.
GpDsRep transform(const GpDsRep& gp, const RigidMotion& motion);

/// Motion taking the root of `gp` to the origin and its fitted root frame
/// to I~, i.e. the pose produced by lp_to_gp with the default root pose.
RigidMotion canonical_root_motion(const GpDsRep& gp);

/// GP -> LP. Each frame and connection is expressed in its parent's frame,
/// each spoke in the frame at its tail. The root frame is I~ and the root
/// connection is the zero placeholder. Output is unscaled.
LpDsRep gp_to_lp(const GpDsRep& gp);
LpDsRep gp_to_lp(const GpDsRep& gp, const FittedFrames& fitted);

struct ReconstructOptions {
  /// Pose of the root frame; default I~ at the origin.
  std::optional<RigidMotion> root_pose;
  /// Multiplies every length of a scaled LP (required for scaled input).
  /// For unscaled input the reconstruction is rescaled to this LP-size.
  std::optional<double> target_size;
};

/// LP -> GP, breadth first from the root.
GpDsRep lp_to_gp(const LpDsRep& lp, const ReconstructOptions& options = {});

/// Reconstructed global frames (same traversal as lp_to_gp).
std::vector<Frame> global_frames(const LpDsRep& lp, const Eigen::Matrix3d& root_rotation = Eigen::Matrix3d::Identity());

}  // namespace skelstat

#endif  // SKELSTAT_REPARAM_HPP
