#ifndef SKELSTAT_HIERARCHY_HPP
#define SKELSTAT_HIERARCHY_HPP

// Hierarchical local frames on a GP-ds-rep skeleton: the s-centroid root,
// the spine, the veins and the crest tails on the fold.

#include <vector>

#include "skelstat/dsrep.hpp"

namespace skelstat {

/// Parent links follow the priority s-centroid > spine > veins: spinal
/// points chain outward from the root along the middle row, every vein
/// chains outward from its spinal point, and extra crest points hang from
/// the grid point named in crest_parents.
FrameHierarchy build_hierarchy(const GridLayout& grid);

/// Record the crest spoke of every crest-tail node.
void attach_crest_spokes(FrameHierarchy& hierarchy, const std::vector<Spoke>& spokes);

/// Unit normal of the discrete skeletal sheet at every skeletal point.
/// Central differences along grid rows and columns in the interior,
/// one-sided differences on the border; crest-only points copy the normal
/// of the grid point they hang from. Oriented so that n . u_up > 0.
std::vector<Eigen::Vector3d> estimate_normals(const GpDsRep& gp);

struct FittedFrames {
  std::vector<Frame> frames_global;
  FrameHierarchy hierarchy;
  std::vector<Connection> connections_global;  // root entry is the zero placeholder
};

/// Projection of q onto the tangent plane through p with normal n.
inline Eigen::Vector3d project_to_plane(const Eigen::Vector3d& q, const Eigen::Vector3d& p,
                                        const Eigen::Vector3d& n) {
  return q - (q - p).dot(n) * n;
}

/// Tangent direction b at p from the projected parent and child positions:
/// b = (v1 + v2)/|v1 + v2| with v1 = (p - p1')/|.|, v2 = (p2' - p)/|.|.
/// Throws NumericalError when the two directions cancel.
Eigen::Vector3d three_point_tangent(const Eigen::Vector3d& parent_pos, const Eigen::Vector3d& p,
                                    const Eigen::Vector3d& child_pos, const Eigen::Vector3d& n);

/// Fit a proper frame at every skeletal point.
FittedFrames fit_frames(const GpDsRep& gp);
FittedFrames fit_frames(const GpDsRep& gp, const std::vector<Eigen::Vector3d>& normals);

}  // namespace skelstat

#endif  // SKELSTAT_HIERARCHY_HPP
