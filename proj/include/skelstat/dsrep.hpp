#ifndef SKELSTAT_DSREP_HPP
#define SKELSTAT_DSREP_HPP

// Data model for discrete skeletal representations: the skeletal grid, the
// globally parameterized GP-ds-rep and the locally parameterized LP-ds-rep.

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skelstat/frame.hpp"
#include "skelstat/sphere.hpp"

namespace skelstat {

enum class SpokeKind { Up, Down, Crest };
enum class NodeRole { SCentroid, Spinal, Vein, CrestTail };

std::string to_string(SpokeKind kind);
std::string to_string(NodeRole role);
SpokeKind spoke_kind_from_string(const std::string& s);
NodeRole node_role_from_string(const std::string& s);

/// Skeletal grid topology. Grid point (row, col) has skeletal index
/// row * cols + col; the spine is the middle row. Crest tails listed in
/// crest_order may be grid points or extra fold points with indices
/// rows * cols, rows * cols + 1, ...; each extra point names the grid point
/// it hangs from in crest_parents (parallel to crest_order).
struct GridLayout {
  int rows = 0;
  int cols = 0;
  /// Points continuing the spine past its low-column and high-column ends.
  std::optional<std::array<int, 2>> spine_extensions;
  std::vector<int> crest_order;
  std::vector<int> crest_parents;

  int spine_row() const { return (rows - 1) / 2; }
  int root_col() const { return (cols - 1) / 2; }
  int index(int row, int col) const { return row * cols + col; }
  int row_of(int idx) const { return idx / cols; }
  int col_of(int idx) const { return idx % cols; }
  int grid_size() const { return rows * cols; }
  int root() const { return index(spine_row(), root_col()); }
  int crest_only_count() const;
  int node_count() const { return grid_size() + crest_only_count(); }
  bool is_grid_point(int idx) const { return idx >= 0 && idx < grid_size(); }

  /// Throws ValidationError describing the first violated constraint.
  void validate() const;

  bool operator==(const GridLayout&) const = default;
};

struct Spoke {
  int tail = 0;
  SpokeKind kind = SpokeKind::Up;
  Eigen::Vector3d dir = Eigen::Vector3d::UnitZ();
  double length = 1.0;

  bool operator==(const Spoke&) const = default;
};

/// Spanning tree over skeletal points rooted at the s-centroid.
struct FrameHierarchy {
  std::vector<int> parent;  // parent[root] == root
  std::vector<std::vector<int>> children;
  std::vector<NodeRole> roles;
  std::map<int, int> crest_child_spoke;  // crest-tail node -> its crest spoke
  int root = 0;

  size_t size() const { return parent.size(); }
  /// Parents first; siblings in increasing index order.
  std::vector<int> bfs_order() const;

  /// Builds children/root from a parent array and checks the tree property.
  static FrameHierarchy from_parents(std::vector<int> parent, std::vector<NodeRole> roles);
  void validate() const;
};

/// Globally parameterized ds-rep.
struct GpDsRep {
  GridLayout grid;
  Samples3 skeletal_points;  // n_p x 3
  std::vector<Spoke> spokes;

  int point_count() const { return static_cast<int>(skeletal_points.rows()); }
  int spoke_count() const { return static_cast<int>(spokes.size()); }
  Eigen::Vector3d point(int j) const { return skeletal_points.row(j).transpose(); }
  Eigen::Vector3d tip(int i) const;
  Samples3 tips() const;
  Samples3 tails() const;
  void validate() const;
};

struct Connection {
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();  // zero for the root placeholder
  double length = 0.0;

  bool operator==(const Connection&) const = default;
};

/// Locally parameterized ds-rep. Spoke directions are in the frame at the
/// spoke's tail; frames and connection directions are in the parent frame.
struct LpDsRep {
  GridLayout grid;
  FrameHierarchy hierarchy;
  std::vector<Spoke> spokes;
  std::vector<Frame> frames;
  std::vector<Connection> connections;
  bool scaled = false;
  /// For unscaled reps the sum of lengths; for scaled ones the factor that
  /// was divided out.
  double lp_size = 0.0;

  int point_count() const { return static_cast<int>(frames.size()); }
  int spoke_count() const { return static_cast<int>(spokes.size()); }
  /// Sum of spoke and connection lengths as stored.
  double total_length() const;
  void validate() const;
};

/// Same grid, hierarchy and spoke layout.
bool structurally_equal(const LpDsRep& a, const LpDsRep& b);
bool structurally_equal(const GpDsRep& a, const GpDsRep& b);

/// Centered, unit-Frobenius-norm configuration C P / |C P|.
Samples3 pre_shape(const Samples3& points);
inline Samples3 pre_shape(const GpDsRep& gp) { return pre_shape(gp.skeletal_points); }

/// Centroid size |C X| of a point set.
double centroid_size(const Samples3& points);

enum class SizeBasis { Tips, Tails };
double gp_size(const GpDsRep& gp, SizeBasis basis = SizeBasis::Tips);

/// LP-size: sum of spoke and connection lengths of an unscaled rep.
double lp_size(const LpDsRep& lp);

/// Divide every length by the LP-size. Already scaled input is returned
/// unchanged up to rounding.
LpDsRep scale_lp(const LpDsRep& lp);

/// Number of GOPs in a partial-test family.
int lp_gop_count(int n_spokes, int n_points);
int gp_gop_count(int n_spokes, int n_points);

}  // namespace skelstat

#endif  // SKELSTAT_DSREP_HPP
