#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "skelstat/hierarchy.hpp"
#include "skelstat/io.hpp"
#include "skelstat/reparam.hpp"
#include "test_support.hpp"

using namespace skelstat;
using namespace skelstat::testing;
using std::numbers::pi;

namespace {

const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();

// Sheet z = f(x, y) sampled on a rows x cols grid with spokes along the
// analytic normal.
GpDsRep curved_sheet(int rows, int cols, double spacing, const std::function<double(double, double)>& f) {
  GpDsRep gp;
  gp.grid.rows = rows;
  gp.grid.cols = cols;
  gp.skeletal_points.resize(rows * cols, 3);
  const double h = 1e-6;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = spacing * (c - cols / 2), y = spacing * (r - rows / 2);
      const int j = gp.grid.index(r, c);
      gp.skeletal_points.row(j) << x, y, f(x, y);
      const Eigen::Vector3d n =
          Eigen::Vector3d(-(f(x + h, y) - f(x - h, y)) / (2 * h), -(f(x, y + h) - f(x, y - h)) / (2 * h), 1.0).normalized();
      gp.spokes.push_back({j, SpokeKind::Up, n, 0.4 + 0.01 * c});
      gp.spokes.push_back({j, SpokeKind::Down, -n, 0.5 + 0.01 * r});
    }
  }
  gp.validate();
  return gp;
}

struct GopError {
  double angle = 0.0;
  double length = 0.0;
};

GopError lp_difference(const LpDsRep& a, const LpDsRep& b) {
  GopError e;
  for (size_t i = 0; i < a.spokes.size(); ++i) {
    e.angle = std::max(e.angle, geodesic_dist(a.spokes[i].dir, b.spokes[i].dir));
    e.length = std::max(e.length, std::abs(a.spokes[i].length - b.spokes[i].length));
  }
  for (size_t j = 0; j < a.frames.size(); ++j) {
    e.angle = std::max(e.angle, max_frame_angle(a.frames[j], b.frames[j]));
    e.length = std::max(e.length, std::abs(a.connections[j].length - b.connections[j].length));
    if (a.connections[j].length > 0) e.angle = std::max(e.angle, geodesic_dist(a.connections[j].dir, b.connections[j].dir));
  }
  return e;
}

struct RoundTripError {
  double position = 0.0;
  double angle = 0.0;
};

RoundTripError round_trip(const GpDsRep& gp) {
  const GpDsRep back = lp_to_gp(gp_to_lp(gp));
  const GpDsRep posed = transform(gp, canonical_root_motion(gp));
  RoundTripError e;
  e.position = (back.skeletal_points - posed.skeletal_points).cwiseAbs().maxCoeff();
  for (size_t i = 0; i < gp.spokes.size(); ++i) {
    e.angle = std::max(e.angle, geodesic_dist(back.spokes[i].dir, posed.spokes[i].dir));
    e.position = std::max(e.position, std::abs(back.spokes[i].length - posed.spokes[i].length));
  }
  return e;
}

}  // namespace

TEST_CASE("LP is invariant under rigid motions") {
  const GpDsRep gp = load_gp(fixture("ellipsoid_5x9_gp.json"));
  const LpDsRep base = gp_to_lp(gp);
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const LpDsRep moved = gp_to_lp(transform(gp, random_motion(rng)));
    const GopError e = lp_difference(base, moved);
    CHECK(e.angle < 1e-9);
    CHECK(e.length < 1e-9);
  }
}

TEST_CASE("root frame and root connection conventions") {
  const LpDsRep lp = gp_to_lp(load_gp(fixture("ellipsoid_5x9_gp.json")));
  CHECK(max_frame_angle(lp.frames[lp.hierarchy.root], Frame::canonical()) == 0.0);
  CHECK(lp.connections[lp.hierarchy.root].length == 0.0);
  CHECK(lp.connections[lp.hierarchy.root].dir.norm() == 0.0);
  CHECK_FALSE(lp.scaled);
}

TEST_CASE("already aligned frames give the canonical local frame") {
  // Flat sheet in z = 0, spine along +x: on the high-column side every
  // global frame is (e3, e1, e2) and every connection runs along e1.
  const GpDsRep gp = curved_sheet(3, 7, 0.5, [](double, double) { return 0.0; });
  const LpDsRep lp = gp_to_lp(gp);
  for (int c = 3; c < 7; ++c) {
    const int j = gp.grid.index(1, c);
    CHECK(max_frame_angle(lp.frames[j], Frame::canonical()) < 1e-12);
    if (c > 3) CHECK((lp.connections[j].dir - e1).norm() < 1e-12);
  }
}

TEST_CASE("round trip on the fixture") {
  const GpDsRep gp = load_gp(fixture("ellipsoid_5x9_gp.json"));
  const RoundTripError e = round_trip(gp);
  CHECK(e.position < 1e-8);
  CHECK(e.angle < 1e-9);

  SUBCASE("global frames agree with the fitted frames after the root motion") {
    const auto fitted = fit_frames(gp);
    const RigidMotion m = canonical_root_motion(gp);
    const auto frames = global_frames(gp_to_lp(gp));
    for (size_t j = 0; j < frames.size(); ++j) CHECK(max_frame_angle(frames[j], m.rotation * fitted.frames_global[j]) < 1e-9);
  }
}

TEST_CASE("round trip along a depth-30 chain") {
  const GpDsRep gp = curved_sheet(3, 59, 0.1, [](double x, double y) { return 0.3 * std::sin(1.3 * x) + 0.1 * x * y; });
  const auto h = build_hierarchy(gp.grid);
  int depth = 0;
  for (size_t j = 0; j < h.size(); ++j) {
    int d = 0;
    for (int k = static_cast<int>(j); k != h.root; k = h.parent[k]) ++d;
    depth = std::max(depth, d);
  }
  CHECK(depth == 30);
  const RoundTripError e = round_trip(gp);
  CHECK(e.position < 1e-8);
  CHECK(e.angle < 1e-9);
}

TEST_CASE("unit chain reconstructs collinear points") {
  LpDsRep lp = gp_to_lp(curved_sheet(3, 5, 0.7, [](double x, double) { return 0.2 * x * x; }));
  for (auto& f : lp.frames) f = Frame::canonical();
  for (size_t j = 0; j < lp.connections.size(); ++j) {
    if (static_cast<int>(j) == lp.hierarchy.root) continue;
    lp.connections[j] = {e1, 1.0};
  }
  lp.lp_size = lp.total_length();
  const GpDsRep gp = lp_to_gp(lp);
  CHECK(gp.point(lp.grid.index(1, 2)).norm() == 0.0);
  CHECK((gp.point(lp.grid.index(1, 3)) - e1).norm() < 1e-15);
  CHECK((gp.point(lp.grid.index(1, 4)) - 2 * e1).norm() < 1e-15);
}

TEST_CASE("root pose equivariance") {
  const LpDsRep lp = gp_to_lp(load_gp(fixture("ellipsoid_5x9_gp.json")));
  const GpDsRep base = lp_to_gp(lp);
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    ReconstructOptions opt;
    opt.root_pose = random_motion(rng);
    const GpDsRep posed = lp_to_gp(lp, opt);
    for (int j = 0; j < base.point_count(); ++j) {
      CHECK((posed.point(j) - opt.root_pose->apply(base.point(j))).norm() < 1e-9);
    }
    for (size_t i = 0; i < base.spokes.size(); ++i) {
      CHECK((posed.spokes[i].dir - opt.root_pose->rotation * base.spokes[i].dir).norm() < 1e-9);
    }
  }
}

TEST_CASE("scaled reconstruction needs a target size") {
  const LpDsRep lp = gp_to_lp(load_gp(fixture("ellipsoid_5x9_gp.json")));
  const LpDsRep scaled = scale_lp(lp);
  CHECK_THROWS_AS(lp_to_gp(scaled), ValidationError);
  ReconstructOptions opt;
  opt.target_size = lp.lp_size;
  const GpDsRep restored = lp_to_gp(scaled, opt);
  const GpDsRep direct = lp_to_gp(lp);
  CHECK((restored.skeletal_points - direct.skeletal_points).cwiseAbs().maxCoeff() < 1e-9);

  SUBCASE("unscaled input is rescaled to the requested size") {
    ReconstructOptions half;
    half.target_size = lp.lp_size / 2;
    const GpDsRep small = lp_to_gp(lp, half);
    CHECK((small.skeletal_points - direct.skeletal_points / 2).cwiseAbs().maxCoeff() < 1e-9);
  }
}
