#include "skelstat/dsrep.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "skelstat/error.hpp"

namespace skelstat {

std::string to_string(SpokeKind kind) {
  switch (kind) {
    case SpokeKind::Up: return "up";
    case SpokeKind::Down: return "down";
    case SpokeKind::Crest: return "crest";
  }
  return "?";
}

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::SCentroid: return "s_centroid";
    case NodeRole::Spinal: return "spinal";
    case NodeRole::Vein: return "vein";
    case NodeRole::CrestTail: return "crest_tail";
  }
  return "?";
}

SpokeKind spoke_kind_from_string(const std::string& s) {
  if (s == "up") return SpokeKind::Up;
  if (s == "down") return SpokeKind::Down;
  if (s == "crest") return SpokeKind::Crest;
  throw ValidationError("unknown spoke kind '" + s + "'");
}

NodeRole node_role_from_string(const std::string& s) {
  if (s == "s_centroid") return NodeRole::SCentroid;
  if (s == "spinal") return NodeRole::Spinal;
  if (s == "vein") return NodeRole::Vein;
  if (s == "crest_tail") return NodeRole::CrestTail;
  throw ValidationError("unknown node role '" + s + "'");
}

// ---------------------------------------------------------------------------

int GridLayout::crest_only_count() const {
  return static_cast<int>(std::count_if(crest_order.begin(), crest_order.end(),
                                        [&](int i) { return i >= grid_size(); }));
}

void GridLayout::validate() const {
  if (rows <= 0 || cols <= 0) throw ValidationError("grid: rows and cols must be positive");
  if (rows % 2 == 0) throw ValidationError("grid: rows must be odd");
  if (rows < 3 || cols < 3) throw ValidationError("grid too small");

  std::set<int> seen;
  std::vector<int> extra;
  for (int idx : crest_order) {
    if (idx < 0) throw ValidationError("grid: negative crest index");
    if (!seen.insert(idx).second) throw ValidationError("grid: duplicate crest index");
    if (idx >= grid_size()) extra.push_back(idx);
  }
  std::sort(extra.begin(), extra.end());
  for (size_t k = 0; k < extra.size(); ++k) {
    if (extra[k] != grid_size() + static_cast<int>(k))
      throw ValidationError("grid: crest-only indices must follow the grid points contiguously");
  }
  if (!extra.empty()) {
    if (crest_parents.size() != crest_order.size())
      throw ValidationError("grid: crest_parents must parallel crest_order");
    for (size_t k = 0; k < crest_order.size(); ++k) {
      if (crest_order[k] >= grid_size() && !is_grid_point(crest_parents[k]))
        throw ValidationError("grid: crest parent must be a grid point");
    }
  }
  if (spine_extensions) {
    for (int e : *spine_extensions) {
      if (e < 0 || e >= node_count()) throw ValidationError("grid: spine extension index out of range");
      if (is_grid_point(e) && row_of(e) == spine_row())
        throw ValidationError("grid: spine extension must lie off the spine");
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<int> FrameHierarchy::bfs_order() const {
  std::vector<int> order;
  order.reserve(parent.size());
  std::queue<int> q;
  q.push(root);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    order.push_back(v);
    for (int c : children[static_cast<size_t>(v)]) q.push(c);
  }
  return order;
}

FrameHierarchy FrameHierarchy::from_parents(std::vector<int> parent, std::vector<NodeRole> roles) {
  FrameHierarchy h;
  const int n = static_cast<int>(parent.size());
  if (n == 0) throw ValidationError("hierarchy: empty");
  if (roles.size() != parent.size()) throw ValidationError("hierarchy: roles/parent size mismatch");
  h.parent = std::move(parent);
  h.roles = std::move(roles);
  h.children.assign(static_cast<size_t>(n), {});
  int root = -1;
  for (int i = 0; i < n; ++i) {
    const int p = h.parent[static_cast<size_t>(i)];
    if (p < 0 || p >= n) throw ValidationError("hierarchy: parent index out of range");
    if (p == i) {
      if (root >= 0) throw ValidationError("hierarchy not a tree (multiple roots)");
      root = i;
    } else {
      h.children[static_cast<size_t>(p)].push_back(i);
    }
  }
  if (root < 0) throw ValidationError("hierarchy not a tree");
  h.root = root;
  h.validate();
  return h;
}

void FrameHierarchy::validate() const {
  const int n = static_cast<int>(parent.size());
  if (children.size() != parent.size() || roles.size() != parent.size())
    throw ValidationError("hierarchy: inconsistent sizes");
  if (root < 0 || root >= n || parent[static_cast<size_t>(root)] != root)
    throw ValidationError("hierarchy not a tree");
  // Every node must reach the root in fewer than n steps.
  for (int i = 0; i < n; ++i) {
    int v = i;
    int steps = 0;
    while (v != root) {
      v = parent[static_cast<size_t>(v)];
      if (++steps > n) throw ValidationError("hierarchy not a tree");
    }
  }
  if (roles[static_cast<size_t>(root)] != NodeRole::SCentroid)
    throw ValidationError("hierarchy: root must be the s-centroid");
}

// ---------------------------------------------------------------------------

Eigen::Vector3d GpDsRep::tip(int i) const {
  const Spoke& s = spokes[static_cast<size_t>(i)];
  return point(s.tail) + s.length * s.dir;
}

Samples3 GpDsRep::tips() const {
  Samples3 out(spoke_count(), 3);
  for (int i = 0; i < spoke_count(); ++i) out.row(i) = tip(i).transpose();
  return out;
}

Samples3 GpDsRep::tails() const {
  Samples3 out(spoke_count(), 3);
  for (int i = 0; i < spoke_count(); ++i) out.row(i) = skeletal_points.row(spokes[static_cast<size_t>(i)].tail);
  return out;
}

namespace {

void validate_spokes(const std::vector<Spoke>& spokes, int n_points) {
  std::set<int> up_tails, down_tails;
  for (const auto& s : spokes) {
    if (s.tail < 0 || s.tail >= n_points) throw ValidationError("spoke tail index out of range");
    if (!(s.length > 0.0)) throw ValidationError("non-positive spoke length");
    if (std::abs(s.dir.norm() - 1.0) > 1e-9) throw ValidationError("spoke direction not unit length");
    if (s.kind == SpokeKind::Up) up_tails.insert(s.tail);
    if (s.kind == SpokeKind::Down) down_tails.insert(s.tail);
  }
  if (up_tails != down_tails) throw ValidationError("up spokes and down spokes must share tails");
}

}  // namespace

void GpDsRep::validate() const {
  grid.validate();
  if (point_count() != grid.node_count()) throw ValidationError("skeletal point count does not match grid");
  validate_spokes(spokes, point_count());
}

double LpDsRep::total_length() const {
  double s = 0.0;
  for (const auto& sp : spokes) s += sp.length;
  for (const auto& c : connections) s += c.length;
  return s;
}

void LpDsRep::validate() const {
  grid.validate();
  hierarchy.validate();
  const auto n = static_cast<size_t>(grid.node_count());
  if (hierarchy.size() != n || frames.size() != n || connections.size() != n)
    throw ValidationError("LP: frame/connection count does not match grid");
  if (hierarchy.root != grid.root()) throw ValidationError("LP: hierarchy root is not the grid s-centroid");
  validate_spokes(spokes, static_cast<int>(n));
  for (size_t j = 0; j < n; ++j) {
    if (!frames[j].is_valid(1e-9)) throw ValidationError("LP: frame " + std::to_string(j) + " is not a proper frame");
    const auto& c = connections[j];
    if (static_cast<int>(j) == hierarchy.root) {
      if (c.length != 0.0) throw ValidationError("LP: root connection must have zero length");
    } else {
      if (!(c.length > 0.0)) throw ValidationError("non-positive connection length");
      if (std::abs(c.dir.norm() - 1.0) > 1e-9) throw ValidationError("connection direction not unit length");
    }
  }
  if (scaled && std::abs(total_length() - 1.0) > 1e-12)
    throw ValidationError("LP: scaled rep does not have unit LP-size");
  if (!(lp_size > 0.0)) throw ValidationError("LP: lp_size must be positive");
}

bool structurally_equal(const LpDsRep& a, const LpDsRep& b) {
  if (!(a.grid == b.grid) || a.hierarchy.parent != b.hierarchy.parent) return false;
  if (a.spokes.size() != b.spokes.size() || a.frames.size() != b.frames.size()) return false;
  for (size_t i = 0; i < a.spokes.size(); ++i) {
    if (a.spokes[i].tail != b.spokes[i].tail || a.spokes[i].kind != b.spokes[i].kind) return false;
  }
  return true;
}

bool structurally_equal(const GpDsRep& a, const GpDsRep& b) {
  if (!(a.grid == b.grid) || a.point_count() != b.point_count() || a.spokes.size() != b.spokes.size()) return false;
  for (size_t i = 0; i < a.spokes.size(); ++i) {
    if (a.spokes[i].tail != b.spokes[i].tail || a.spokes[i].kind != b.spokes[i].kind) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Samples3 pre_shape(const Samples3& points) {
  if (points.rows() < 2) throw ValidationError("pre_shape needs at least 2 points");
  Samples3 centered = points.rowwise() - points.colwise().mean();
  const double norm = centered.norm();
  const double scale = points.cwiseAbs().maxCoeff();
  if (!(norm > 1e-14 * scale) || norm == 0.0) throw NumericalError("degenerate configuration");
  return centered / norm;
}

double centroid_size(const Samples3& points) {
  if (points.rows() == 0) return 0.0;
  return (points.rowwise() - points.colwise().mean()).norm();
}

double gp_size(const GpDsRep& gp, SizeBasis basis) {
  return centroid_size(basis == SizeBasis::Tips ? gp.tips() : gp.tails());
}

double lp_size(const LpDsRep& lp) { return lp.total_length(); }

LpDsRep scale_lp(const LpDsRep& lp) {
  const double ell = lp.total_length();
  if (!(ell > 0.0)) throw ValidationError("scale_lp: LP-size must be positive");
  LpDsRep out = lp;
  for (auto& s : out.spokes) s.length /= ell;
  for (auto& c : out.connections) c.length /= ell;
  if (!lp.scaled) out.lp_size = ell;
  out.scaled = true;
  return out;
}

int lp_gop_count(int n_spokes, int n_points) { return 2 * n_spokes + 5 * n_points + 1; }
int gp_gop_count(int n_spokes, int n_points) { return n_points + 2 * n_spokes + 1; }

}  // namespace skelstat
