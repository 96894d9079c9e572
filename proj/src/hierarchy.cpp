#include "skelstat/hierarchy.hpp"

#include <optional>
#include <string>

#include "skelstat/error.hpp"

namespace skelstat {

FrameHierarchy build_hierarchy(const GridLayout& grid) {
  grid.validate();
  const int n = grid.node_count();
  const int s = grid.spine_row();
  const int c0 = grid.root_col();
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<NodeRole> roles(static_cast<size_t>(n), NodeRole::Vein);

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int idx = grid.index(r, c);
      if (r == s) {
        if (c == c0) {
          parent[idx] = idx;
          roles[idx] = NodeRole::SCentroid;
        } else {
          parent[idx] = grid.index(s, c < c0 ? c + 1 : c - 1);
          roles[idx] = NodeRole::Spinal;
        }
      } else {
        parent[idx] = grid.index(r < s ? r + 1 : r - 1, c);
      }
    }
  }
  for (size_t k = 0; k < grid.crest_order.size(); ++k) {
    const int idx = grid.crest_order[k];
    if (idx >= grid.grid_size()) {
      parent[idx] = grid.crest_parents[k];
      roles[idx] = NodeRole::CrestTail;
    } else if (roles[idx] == NodeRole::Vein) {
      roles[idx] = NodeRole::CrestTail;
    }
  }
  return FrameHierarchy::from_parents(std::move(parent), std::move(roles));
}

void attach_crest_spokes(FrameHierarchy& hierarchy, const std::vector<Spoke>& spokes) {
  hierarchy.crest_child_spoke.clear();
  for (size_t i = 0; i < spokes.size(); ++i) {
    if (spokes[i].kind == SpokeKind::Crest) hierarchy.crest_child_spoke[spokes[i].tail] = static_cast<int>(i);
  }
}

std::vector<Eigen::Vector3d> estimate_normals(const GpDsRep& gp) {
  const GridLayout& g = gp.grid;
  const int n = gp.point_count();
  std::vector<Eigen::Vector3d> normals(static_cast<size_t>(n), Eigen::Vector3d::Zero());

  std::vector<std::optional<Eigen::Vector3d>> up_dir(static_cast<size_t>(n));
  for (const auto& s : gp.spokes) {
    if (s.kind == SpokeKind::Up) up_dir[static_cast<size_t>(s.tail)] = s.dir;
  }

  auto diff = [&](int r0, int c0, int r1, int c1) -> Eigen::Vector3d {
    return gp.point(g.index(r1, c1)) - gp.point(g.index(r0, c0));
  };

  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const int idx = g.index(r, c);
      const int cl = c > 0 ? c - 1 : c, cr = c + 1 < g.cols ? c + 1 : c;
      const int rl = r > 0 ? r - 1 : r, rr = r + 1 < g.rows ? r + 1 : r;
      const Eigen::Vector3d along_row = diff(r, cl, r, cr);
      const Eigen::Vector3d along_col = diff(rl, c, rr, c);
      Eigen::Vector3d nrm = along_row.cross(along_col);
      const double scale = along_row.norm() * along_col.norm();
      if (!(nrm.norm() > 1e-10 * scale) || scale == 0.0)
        throw NumericalError("degenerate neighborhood at skeletal point " + std::to_string(idx));
      nrm.normalize();
      if (up_dir[static_cast<size_t>(idx)] && nrm.dot(*up_dir[static_cast<size_t>(idx)]) < 0) nrm = -nrm;
      normals[static_cast<size_t>(idx)] = nrm;
    }
  }
  for (size_t k = 0; k < g.crest_order.size(); ++k) {
    const int idx = g.crest_order[k];
    if (idx >= g.grid_size()) normals[static_cast<size_t>(idx)] = normals[static_cast<size_t>(g.crest_parents[k])];
  }
  return normals;
}

namespace {

Eigen::Vector3d unit_or_throw(const Eigen::Vector3d& v, int node) {
  const double len = v.norm();
  if (!(len > 1e-12)) throw NumericalError("b undefined at node " + std::to_string(node) + " (projected neighbor coincides)");
  return v / len;
}

}  // namespace

Eigen::Vector3d three_point_tangent(const Eigen::Vector3d& parent_pos, const Eigen::Vector3d& p,
                                    const Eigen::Vector3d& child_pos, const Eigen::Vector3d& n) {
  const Eigen::Vector3d v1 = unit_or_throw(p - project_to_plane(parent_pos, p, n), -1);
  const Eigen::Vector3d v2 = unit_or_throw(project_to_plane(child_pos, p, n) - p, -1);
  const Eigen::Vector3d sum = v1 + v2;
  if (sum.norm() < 1e-8) throw NumericalError("b undefined: projected parent and child fold back");
  return sum.normalized();
}

FittedFrames fit_frames(const GpDsRep& gp) { return fit_frames(gp, estimate_normals(gp)); }

FittedFrames fit_frames(const GpDsRep& gp, const std::vector<Eigen::Vector3d>& normals) {
  gp.validate();
  const GridLayout& g = gp.grid;
  FittedFrames out;
  out.hierarchy = build_hierarchy(g);
  attach_crest_spokes(out.hierarchy, gp.spokes);
  const auto& h = out.hierarchy;
  const int n_nodes = static_cast<int>(h.size());
  const int s = g.spine_row();
  const int c0 = g.root_col();

  out.frames_global.resize(static_cast<size_t>(n_nodes));
  out.connections_global.resize(static_cast<size_t>(n_nodes));

  for (int j = 0; j < n_nodes; ++j) {
    const Eigen::Vector3d p = gp.point(j);
    const Eigen::Vector3d& nrm = normals[static_cast<size_t>(j)];
    const NodeRole role = h.roles[static_cast<size_t>(j)];
    Eigen::Vector3d b;

    if (role == NodeRole::SCentroid) {
      // Both neighbors are children here; child 1 is the lower column.
      const Eigen::Vector3d w1 = unit_or_throw(project_to_plane(gp.point(g.index(s, c0 - 1)), p, nrm) - p, j);
      const Eigen::Vector3d w2 = unit_or_throw(project_to_plane(gp.point(g.index(s, c0 + 1)), p, nrm) - p, j);
      const Eigen::Vector3d diff = w2 - w1;
      if (diff.norm() < 1e-8) throw NumericalError("b undefined at node " + std::to_string(j));
      b = diff.normalized();
    } else {
      const Eigen::Vector3d parent_pos = gp.point(h.parent[static_cast<size_t>(j)]);
      std::optional<Eigen::Vector3d> child_pos;
      if (role == NodeRole::CrestTail) {
        const auto it = h.crest_child_spoke.find(j);
        if (it == h.crest_child_spoke.end()) throw ValidationError("crest tail " + std::to_string(j) + " has no crest spoke");
        child_pos = gp.tip(it->second);
      } else if (role == NodeRole::Spinal) {
        const int c = g.col_of(j);
        const int next = c < c0 ? c - 1 : c + 1;
        if (next >= 0 && next < g.cols) {
          child_pos = gp.point(g.index(s, next));
        } else if (g.spine_extensions) {
          child_pos = gp.point((*g.spine_extensions)[c < c0 ? 0 : 1]);
        }
      } else {
        const int r = g.row_of(j);
        const int next = r < s ? r - 1 : r + 1;
        if (next >= 0 && next < g.rows) child_pos = gp.point(g.index(next, g.col_of(j)));
      }

      const Eigen::Vector3d v1 = unit_or_throw(p - project_to_plane(parent_pos, p, nrm), j);
      if (child_pos) {
        const Eigen::Vector3d v2 = unit_or_throw(project_to_plane(*child_pos, p, nrm) - p, j);
        const Eigen::Vector3d sum = v1 + v2;
        if (sum.norm() < 1e-8) throw NumericalError("b undefined at node " + std::to_string(j));
        b = sum.normalized();
      } else {
        // End of a vein without a child: continue the incoming direction.
        b = v1;
      }
    }
    b = (b - b.dot(nrm) * nrm).normalized();
    out.frames_global[static_cast<size_t>(j)] = Frame::from_normal_tangent(nrm, b);

    if (j != h.root) {
      const Eigen::Vector3d d = p - gp.point(h.parent[static_cast<size_t>(j)]);
      const double len = d.norm();
      if (!(len > 0.0)) throw NumericalError("zero-length connection at node " + std::to_string(j));
      out.connections_global[static_cast<size_t>(j)] = {d / len, len};
    }
  }
  return out;
}

}  // namespace skelstat
