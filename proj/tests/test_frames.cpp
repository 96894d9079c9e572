#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <functional>
#include <numbers>

#include "skelstat/frame.hpp"
#include "skelstat/hierarchy.hpp"
#include "skelstat/io.hpp"
#include "skelstat/reparam.hpp"
#include "test_support.hpp"

using namespace skelstat;
using namespace skelstat::testing;
using std::numbers::pi;

namespace {

const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
const Eigen::Vector3d e2 = Eigen::Vector3d::UnitY();
const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();

// Grid sheet without crest points; up spokes along `up(r, c)`.
GpDsRep make_sheet(int rows, int cols, const std::function<Eigen::Vector3d(int, int)>& pos,
                   const std::function<Eigen::Vector3d(int, int)>& up) {
  GpDsRep gp;
  gp.grid.rows = rows;
  gp.grid.cols = cols;
  gp.skeletal_points.resize(rows * cols, 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int j = gp.grid.index(r, c);
      gp.skeletal_points.row(j) = pos(r, c).transpose();
      gp.spokes.push_back({j, SpokeKind::Up, up(r, c), 0.5});
      gp.spokes.push_back({j, SpokeKind::Down, -up(r, c), 0.5});
    }
  }
  gp.validate();
  return gp;
}

// Tangent at B of the circle through A, B, C, oriented toward C. Built
// from the circumcenter, independent of the bisector formula.
Eigen::Vector3d circle_tangent(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d u = a - b, v = c - b;
  const Eigen::Vector3d w = u.cross(v);
  if (w.norm() < 1e-14) return v.normalized();
  const Eigen::Vector3d center = b + (u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u)) / (2 * w.squaredNorm());
  Eigen::Vector3d t = w.cross(b - center).normalized();
  if (t.dot(v) < 0) t = -t;
  return t;
}

}  // namespace

TEST_CASE("frame basics") {
  const Frame i = Frame::canonical();
  CHECK((i.n() - e3).norm() == 0.0);
  CHECK((i.b() - e1).norm() == 0.0);
  CHECK((i.b_perp() - e2).norm() == 0.0);
  CHECK(i.is_valid(1e-15));
  const Frame f = Frame::from_normal_tangent(e1, e2);
  CHECK((f.b_perp() - e3).norm() == 0.0);
  CHECK(Frame(e1, e2, -e3).orthonormality_error() > 1.0);
}

TEST_CASE("alignment to the canonical frame") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const Frame parent = random_frame(rng);
    const Eigen::Matrix3d m = align_to_canonical(parent);
    CHECK(((m * parent).axes - Frame::canonical().axes).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
  }
  SUBCASE("antipodal normal and tangent") {
    const Frame down(Eigen::Vector3d(-e3), Eigen::Vector3d(-e1), e2);  // proper: (-e3) x (-e1) = e2
    REQUIRE(down.is_valid());
    const Eigen::Matrix3d m = align_to_canonical(down);
    CHECK(((m * down).axes - Frame::canonical().axes).cwiseAbs().maxCoeff() < 1e-12);
    const Frame flipped_b(e3, Eigen::Vector3d(-e1), Eigen::Vector3d(-e2));
    const Eigen::Matrix3d m2 = align_to_canonical(flipped_b);
    CHECK(((m2 * flipped_b).axes - Frame::canonical().axes).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("expressing a child in its parent frame") {
  Rng rng(32);
  SUBCASE("round trip through frame_from_parent") {
    for (int trial = 0; trial < 500; ++trial) {
      const Frame parent = random_frame(rng), child = random_frame(rng);
      const Frame local = express_in_parent(parent, child);
      CHECK(local.is_valid(1e-10));
      CHECK(max_frame_angle(frame_from_parent(parent, local), child) < 1e-10);
    }
  }
  SUBCASE("child equal to parent is the canonical frame") {
    const Frame parent = random_frame(rng);
    CHECK(max_frame_angle(express_in_parent(parent, parent), Frame::canonical()) < 1e-10);
  }
  SUBCASE("child turned 30 degrees about the parent normal") {
    const Frame parent = random_frame(rng);
    const Frame child = axis_rotation(parent.n(), pi / 6) * parent;
    const Frame expect = axis_rotation(e3, pi / 6) * Frame::canonical();
    CHECK(max_frame_angle(express_in_parent(parent, child), expect) < 1e-10);
  }
  SUBCASE("left-handed parent takes the reflection adjustment") {
    for (int trial = 0; trial < 100; ++trial) {
      const Frame proper = random_frame(rng);
      const Frame left(proper.n(), proper.b(), -proper.b_perp());
      REQUIRE(aligned_is_reflected(align_to_canonical(left), left));
      // A mirrored skeleton has left-handed frames throughout.
      const Frame child = random_frame(rng);
      const Frame left_child(child.n(), child.b(), -child.b_perp());
      const Frame local = express_in_parent(left, left_child);
      CHECK(local.is_valid(1e-10));
      CHECK(local.axes.determinant() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("hierarchy on the 3x3 grid") {
  GridLayout g;
  g.rows = 3;
  g.cols = 3;
  const FrameHierarchy h = build_hierarchy(g);
  REQUIRE(h.size() == 9);
  CHECK(h.root == g.index(1, 1));
  CHECK(h.children[4] == std::vector<int>{1, 3, 5, 7});
  CHECK(h.roles[4] == NodeRole::SCentroid);
  CHECK(h.roles[3] == NodeRole::Spinal);
  CHECK(h.roles[5] == NodeRole::Spinal);
  for (int c = 0; c < 3; ++c) {
    CHECK(h.parent[g.index(0, c)] == g.index(1, c));
    CHECK(h.parent[g.index(2, c)] == g.index(1, c));
    CHECK(h.roles[g.index(0, c)] == NodeRole::Vein);
  }
  const auto order = h.bfs_order();
  CHECK(order.front() == h.root);
  std::vector<int> seen(9, 0);
  for (int j : order) {
    CHECK(seen[h.parent[j]] + (j == h.root) > 0);
    seen[j] = 1;
  }
}

TEST_CASE("hierarchy of the 5x9 fixture matches the hand-built parents") {
  const GpDsRep gp = load_gp(fixture("ellipsoid_5x9_gp.json"));
  const auto golden = nlohmann::json::parse(read_text_file(fixture("ellipsoid_5x9_parents.json")));
  const FrameHierarchy h = build_hierarchy(gp.grid);
  CHECK(h.root == golden.at("root").get<int>());
  CHECK(h.parent == golden.at("parent").get<std::vector<int>>());

  int spinal_children_of_root = 0;
  for (int c : h.children[h.root]) spinal_children_of_root += h.roles[c] == NodeRole::Spinal;
  CHECK(spinal_children_of_root == 2);
  const int s = gp.grid.spine_row();
  for (int c = 1; c + 1 < gp.grid.cols; ++c) {
    const int j = gp.grid.index(s, c);
    if (j == h.root) continue;
    int spinal = 0;
    for (int k : h.children[j]) spinal += h.roles[k] == NodeRole::Spinal;
    CHECK(spinal == 1);
  }
}

TEST_CASE("hierarchy rejects unusable grids") {
  GridLayout g;
  g.rows = 3;
  g.cols = 1;
  CHECK_THROWS_WITH_AS(build_hierarchy(g), "grid too small", ValidationError);
  g.rows = 4;
  g.cols = 5;
  CHECK_THROWS_AS(build_hierarchy(g), ValidationError);
}

TEST_CASE("normals") {
  SUBCASE("flat sheet") {
    const auto gp = make_sheet(
        5, 7, [](int r, int c) { return Eigen::Vector3d(0.3 * c, 0.2 * r, 0.0); }, [](int, int) { return e3; });
    for (const auto& n : estimate_normals(gp)) CHECK((n - e3).norm() < 1e-12);
  }
  SUBCASE("swapping spoke kinds flips the normals") {
    auto gp = make_sheet(
        5, 7, [](int r, int c) { return Eigen::Vector3d(0.3 * c, 0.2 * r, 0.01 * r * c); },
        [](int, int) { return e3; });
    const auto before = estimate_normals(gp);
    for (auto& sp : gp.spokes) sp.kind = sp.kind == SpokeKind::Up ? SpokeKind::Down : SpokeKind::Up;
    const auto after = estimate_normals(gp);
    for (size_t j = 0; j < before.size(); ++j) CHECK((before[j] + after[j]).norm() < 1e-12);
  }
  SUBCASE("cylinder patch") {
    const double radius = 4.0, h = 0.1;
    auto radial = [&](int r) {
      const double phi = (r - 3) * h / radius;
      return Eigen::Vector3d(0.0, std::sin(phi), std::cos(phi));
    };
    const auto gp = make_sheet(
        7, 9, [&](int r, int c) -> Eigen::Vector3d { return Eigen::Vector3d(h * c, 0, 0) + radius * radial(r); },
        [&](int r, int) { return radial(r); });
    const auto normals = estimate_normals(gp);
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 9; ++c) CHECK(geodesic_dist(normals[gp.grid.index(r, c)], radial(r)) < 2.0 / radius * h);
    }
  }
  SUBCASE("collapsed neighborhood is reported") {
    const auto gp = make_sheet(
        3, 3, [](int, int c) { return Eigen::Vector3d(c, 0, 0); }, [](int, int) { return e3; });
    CHECK_THROWS_AS(estimate_normals(gp), NumericalError);
  }
}

// Spinal b follows the chain away from the root, so it points toward lower
// columns on the low side. The root takes the high-column direction.
TEST_CASE("fitted frames on a straight spine") {
  const auto gp = make_sheet(
      3, 7, [](int r, int c) { return Eigen::Vector3d(0.5 * c, 0.4 * r, 0.0); }, [](int, int) { return e3; });
  const auto fitted = fit_frames(gp);
  for (int c = 0; c < 7; ++c) {
    const Frame& f = fitted.frames_global[gp.grid.index(1, c)];
    const Eigen::Vector3d expect = c < 3 ? Eigen::Vector3d(-e1) : e1;
    CHECK((f.b() - expect).norm() < 1e-12);
  }
}

TEST_CASE("fitted frames on a circular-arc spine") {
  const double radius = 5.0, h = 0.2, width = 0.3;
  auto pos = [&](int r, int c) {
    const double psi = (c - 4) * h / radius;
    const double rr = radius - (r - 2) * width;
    return Eigen::Vector3d(rr * std::sin(psi), radius - rr * std::cos(psi), 0.0);
  };
  const auto gp = make_sheet(5, 9, pos, [](int, int) { return e3; });
  const auto fitted = fit_frames(gp);
  for (int c = 1; c < 8; ++c) {
    const double psi = (c - 4) * h / radius;
    const double sign = c < 4 ? -1.0 : 1.0;
    const Eigen::Vector3d tangent = sign * Eigen::Vector3d(std::cos(psi), std::sin(psi), 0.0);
    const Frame& f = fitted.frames_global[gp.grid.index(2, c)];
    CHECK(geodesic_dist(f.b(), tangent) < h * h);
  }
}

TEST_CASE("fitted frames on the fixture") {
  const GpDsRep gp = load_gp(fixture("ellipsoid_5x9_gp.json"));
  const auto fitted = fit_frames(gp);
  const auto& h = fitted.hierarchy;
  const auto normals = estimate_normals(gp);

  SUBCASE("frames are proper with b in the tangent plane") {
    for (size_t j = 0; j < fitted.frames_global.size(); ++j) {
      const Frame& f = fitted.frames_global[j];
      CHECK(f.is_valid(1e-9));
      CHECK(std::abs(f.b().dot(normals[j])) < 1e-9);
    }
  }
  SUBCASE("connections run from parent to node") {
    for (size_t j = 0; j < h.size(); ++j) {
      if (static_cast<int>(j) == h.root) continue;
      const auto& cn = fitted.connections_global[j];
      const Eigen::Vector3d reach = gp.point(h.parent[j]) + cn.length * cn.dir;
      CHECK((reach - gp.point(static_cast<int>(j))).norm() < 1e-9);
    }
  }
  SUBCASE("b is the tangent of the three-point circle") {
    for (size_t j = 0; j < h.size(); ++j) {
      const int node = static_cast<int>(j);
      if (h.roles[j] != NodeRole::Vein || node == h.root) continue;
      const int r = gp.grid.row_of(node);
      const int next = r < gp.grid.spine_row() ? r - 1 : r + 1;
      if (next < 0 || next >= gp.grid.rows) continue;
      const Eigen::Vector3d p = gp.point(node), n = normals[j];
      const Eigen::Vector3d v1 = (p - project_to_plane(gp.point(h.parent[j]), p, n)).normalized();
      const Eigen::Vector3d v2 = (project_to_plane(gp.point(gp.grid.index(next, gp.grid.col_of(node))), p, n) - p).normalized();
      CHECK(geodesic_dist(fitted.frames_global[j].b(), circle_tangent(p - v1, p, p + v2)) < 1e-8);
    }
  }
  SUBCASE("crest tails bend toward the crest spoke") {
    for (const auto& [node, spoke] : h.crest_child_spoke) {
      const Eigen::Vector3d p = gp.point(node), n = normals[static_cast<size_t>(node)];
      const Eigen::Vector3d u = gp.spokes[static_cast<size_t>(spoke)].dir;
      REQUIRE(std::abs(u.dot(n)) < 1e-12);  // fold spokes lie in the flat sheet
      const Eigen::Vector3d v1 = (p - gp.point(h.parent[static_cast<size_t>(node)])).normalized();
      CHECK(geodesic_dist(fitted.frames_global[static_cast<size_t>(node)].b(), (v1 + u).normalized()) < 1e-9);
    }
  }
  SUBCASE("rigid equivariance") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
      const RigidMotion m = random_motion(rng);
      const auto moved = fit_frames(transform(gp, m));
      for (size_t j = 0; j < h.size(); ++j) {
        CHECK(max_frame_angle(moved.frames_global[j], m.rotation * fitted.frames_global[j]) < 1e-9);
        CHECK(std::abs(moved.connections_global[j].length - fitted.connections_global[j].length) < 1e-9);
      }
    }
  }
  SUBCASE("moving a far node leaves distant frames alone") {
    GpDsRep bumped = gp;
    bumped.skeletal_points(gp.grid.index(0, 0), 2) += 0.05;
    const auto other = fit_frames(bumped);
    for (int r = 0; r < gp.grid.rows; ++r) {
      for (int c = 3; c < gp.grid.cols; ++c) {
        const int j = gp.grid.index(r, c);
        CHECK(max_frame_angle(other.frames_global[j], fitted.frames_global[j]) == 0.0);
      }
    }
  }
}

TEST_CASE("three-point tangent fold-back is an error") {
  CHECK_THROWS_AS(three_point_tangent(e1, Eigen::Vector3d::Zero(), e1, e3), NumericalError);
  const Eigen::Vector3d b = three_point_tangent(-e1, Eigen::Vector3d::Zero(), e2, e3);
  CHECK((b - (e1 + e2).normalized()).norm() < 1e-15);
}
