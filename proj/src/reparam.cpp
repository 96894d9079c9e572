#include "skelstat/reparam.hpp"

#include "skelstat/error.hpp"

namespace skelstat {

GpDsRep transform(const GpDsRep& gp, const RigidMotion& motion) {
  GpDsRep out = gp;
  for (int j = 0; j < out.point_count(); ++j) out.skeletal_points.row(j) = motion.apply(gp.point(j)).transpose();
  for (auto& s : out.spokes) s.dir = (motion.rotation * s.dir).normalized();
  return out;
}

RigidMotion canonical_root_motion(const GpDsRep& gp) {
  const FittedFrames fitted = fit_frames(gp);
  const int root = fitted.hierarchy.root;
  RigidMotion m;
  m.rotation = Frame::canonical().axes * fitted.frames_global[static_cast<size_t>(root)].axes.transpose();
  m.translation = -m.rotation * gp.point(root);
  return m;
}

LpDsRep gp_to_lp(const GpDsRep& gp) { return gp_to_lp(gp, fit_frames(gp)); }

LpDsRep gp_to_lp(const GpDsRep& gp, const FittedFrames& fitted) {
  const auto& h = fitted.hierarchy;
  const size_t n = h.size();
  LpDsRep lp;
  lp.grid = gp.grid;
  lp.hierarchy = h;
  lp.frames.resize(n);
  lp.connections.resize(n);

  std::vector<Eigen::Matrix3d> align(n);
  for (size_t j = 0; j < n; ++j) align[j] = align_to_canonical(fitted.frames_global[j]);

  for (size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) == h.root) {
      lp.frames[j] = Frame::canonical();
      lp.connections[j] = {};
      continue;
    }
    const size_t p = static_cast<size_t>(h.parent[j]);
    lp.frames[j] = express_in_parent(fitted.frames_global[p], fitted.frames_global[j]);
    const Connection& c = fitted.connections_global[j];
    lp.connections[j] = {(align[p] * c.dir).normalized(), c.length};
  }
  lp.spokes = gp.spokes;
  for (auto& s : lp.spokes) s.dir = (align[static_cast<size_t>(s.tail)] * s.dir).normalized();
  lp.scaled = false;
  lp.lp_size = lp.total_length();
  return lp;
}

std::vector<Frame> global_frames(const LpDsRep& lp, const Eigen::Matrix3d& root_rotation) {
  const auto& h = lp.hierarchy;
  std::vector<Frame> g(h.size());
  for (int j : h.bfs_order()) {
    if (j == h.root) {
      g[static_cast<size_t>(j)] = root_rotation * Frame::canonical();
    } else {
      g[static_cast<size_t>(j)] = frame_from_parent(g[static_cast<size_t>(h.parent[static_cast<size_t>(j)])], lp.frames[static_cast<size_t>(j)]);
    }
  }
  return g;
}

GpDsRep lp_to_gp(const LpDsRep& lp, const ReconstructOptions& options) {
  lp.validate();
  double unit = 1.0;
  if (lp.scaled) {
    if (!options.target_size) throw ValidationError("scaled LP requires a target size for reconstruction");
    unit = *options.target_size;
  } else if (options.target_size) {
    unit = *options.target_size / lp.total_length();
  }
  if (!(unit > 0.0)) throw ValidationError("target size must be positive");

  const RigidMotion pose = options.root_pose.value_or(RigidMotion{});
  const auto& h = lp.hierarchy;
  const size_t n = h.size();
  const std::vector<Frame> g = global_frames(lp, pose.rotation);

  std::vector<Eigen::Matrix3d> align(n);
  for (size_t j = 0; j < n; ++j) align[j] = align_to_canonical(g[j]);

  GpDsRep gp;
  gp.grid = lp.grid;
  gp.skeletal_points.resize(static_cast<Eigen::Index>(n), 3);
  for (int j : h.bfs_order()) {
    const auto ju = static_cast<size_t>(j);
    if (j == h.root) {
      gp.skeletal_points.row(j) = pose.translation.transpose();
      continue;
    }
    const auto p = static_cast<size_t>(h.parent[ju]);
    const Eigen::Vector3d dir = align[p].transpose() * lp.connections[ju].dir;
    gp.skeletal_points.row(j) = gp.skeletal_points.row(static_cast<Eigen::Index>(p)) +
                                (unit * lp.connections[ju].length) * dir.transpose();
  }
  gp.spokes = lp.spokes;
  for (auto& s : gp.spokes) {
    s.dir = (align[static_cast<size_t>(s.tail)].transpose() * s.dir).normalized();
    s.length *= unit;
  }
  return gp;
}

}  // namespace skelstat
