#include "skelstat/population.hpp"

#include <cmath>
#include <numbers>

#include "skelstat/error.hpp"
#include "skelstat/parallel.hpp"

namespace skelstat {

LpPopulation LpPopulation::from_members(std::vector<LpDsRep> members) {
  if (members.empty()) throw ValidationError("empty population");
  for (size_t i = 1; i < members.size(); ++i) {
    if (!structurally_equal(members[0], members[i]))
      throw ValidationError("population member " + std::to_string(i) + " differs structurally from member 0");
    if (members[i].scaled != members[0].scaled)
      throw ValidationError("population mixes scaled and unscaled members");
  }
  LpPopulation pop;
  pop.scaled = members[0].scaled;
  pop.members = std::move(members);
  return pop;
}

double lp_distance(const LpDsRep& a, const LpDsRep& b, bool commensurate) {
  if (!structurally_equal(a, b)) throw ValidationError("lp_distance: structural mismatch");
  const double f = commensurate ? std::numbers::pi : 1.0;
  double d2 = 0.0;
  for (size_t i = 0; i < a.spokes.size(); ++i) {
    const double g = geodesic_dist(a.spokes[i].dir, b.spokes[i].dir);
    const double l = f * (a.spokes[i].length - b.spokes[i].length);
    d2 += g * g + l * l;
  }
  for (size_t j = 0; j < a.frames.size(); ++j) {
    d2 += frame_sq_distance(a.frames[j], b.frames[j]);
    if (static_cast<int>(j) == a.hierarchy.root) continue;
    const double g = geodesic_dist(a.connections[j].dir, b.connections[j].dir);
    const double l = f * (a.connections[j].length - b.connections[j].length);
    d2 += g * g + l * l;
  }
  return std::sqrt(d2);
}

namespace {

bool has_three_distinct(const std::vector<UnitVec3>& points) {
  int distinct = 1;
  UnitVec3 second;
  for (size_t i = 1; i < points.size(); ++i) {
    if ((points[i] - points[0]).norm() <= 1e-14) continue;
    if (distinct == 1) {
      second = points[i];
      distinct = 2;
    } else if ((points[i] - second).norm() > 1e-14) {
      return true;
    }
  }
  return false;
}

double max_spread(const std::vector<UnitVec3>& points, const UnitVec3& mean) {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, geodesic_dist(p, mean));
  return m;
}

}  // namespace

UnitVec3 direction_mean(const std::vector<UnitVec3>& points, DirectionMean kind) {
  if (points.empty()) throw ValidationError("direction mean of an empty sample");
  if (kind == DirectionMean::Pns && has_three_distinct(points)) {
    try {
      return euclideanize_pns(points).base_point;
    } catch (const NumericalError&) {
    }
  }
  try {
    return frechet_mean_s2(points);
  } catch (const ConvergenceError& e) {
    return Eigen::Vector3d(e.last_iterate()).normalized();
  }
}

Frame initial_frame(const UnitVec3& n_mean, const UnitVec3& b_mean, const UnitVec3& b_perp_mean,
                    InitialFrame strategy) {
  if (strategy == InitialFrame::CentroidRotation) {
    const Eigen::Vector3d s = n_mean + b_mean + b_perp_mean;
    if (s.norm() < 1e-12) throw NumericalError("initial frame: component means cancel");
    const Eigen::Vector3d one = Eigen::Vector3d::Ones().normalized();
    return rotate_x_to_y(one, s.normalized()) * Frame::canonical();
  }
  const Eigen::Vector3d w = n_mean.cross(b_mean);
  if (w.norm() < 1e-12) throw NumericalError("initial frame: mean n and b are identical or antipodal");
  const Eigen::Vector3d axis = w.normalized();
  const Eigen::Vector3d mid = (n_mean + b_mean).normalized();
  const Eigen::Vector3d n = axis_rotation(axis, -std::numbers::pi / 4) * mid;
  const Eigen::Vector3d b = axis_rotation(axis, std::numbers::pi / 4) * mid;
  return Frame::from_normal_tangent(n.normalized(), b.normalized());
}

double frame_objective(const Frame& f, const std::array<UnitVec3, 3>& targets) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = geodesic_dist(f.axis(i), targets[static_cast<size_t>(i)]);
    s += d * d;
  }
  return std::sqrt(s);
}

FrameMeanResult align_frame(const Frame& start, const std::array<UnitVec3, 3>& targets,
                            const FrameMeanOptions& options) {
  if (!(options.step > 0.0)) throw ValidationError("frame mean: step must be positive");
  FrameMeanResult res;
  res.initial = start;
  res.targets = targets;
  Frame f = start;
  double delta = frame_objective(f, targets);
  res.objective_history.push_back(delta);

  for (int it = 0; it < options.max_iterations; ++it) {
    if (delta < options.tolerance) {
      res.frame = f;
      return res;
    }
    Frame next = f;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d x = next.axis(i);
      const Eigen::Vector3d t = log_map(x, targets[static_cast<size_t>(i)]);
      const Eigen::Vector3d y = (x + options.step * t).normalized();
      next = rotate_x_to_y(x, y) * next;
    }
    const double next_delta = frame_objective(next, targets);
    ++res.iterations;
    if (next_delta > delta) {
      res.frame = f;
      return res;
    }
    f = next;
    res.objective_history.push_back(next_delta);
    const double change = delta - next_delta;
    delta = next_delta;
    if (change < options.tolerance) {
      res.frame = f;
      return res;
    }
  }
  Eigen::VectorXd last(9);
  last << f.n(), f.b(), f.b_perp();
  throw ConvergenceError("frame mean did not converge", last, delta);
}

FrameMeanResult frame_mean(const std::vector<Frame>& frames, const FrameMeanOptions& options) {
  if (frames.empty()) throw ValidationError("frame mean of an empty sample");
  std::array<UnitVec3, 3> targets;
  for (int i = 0; i < 3; ++i) {
    std::vector<UnitVec3> axis;
    axis.reserve(frames.size());
    for (const auto& f : frames) axis.push_back(f.axis(i));
    targets[static_cast<size_t>(i)] = direction_mean(axis, options.direction_mean);
  }
  const Frame start = initial_frame(targets[0], targets[1], targets[2], options.initial);
  return align_frame(start, targets, options);
}

namespace {

double length_mean(const std::vector<double>& v, LengthMean kind) {
  double s = 0.0;
  if (kind == LengthMean::Arithmetic) {
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  for (double x : v) s += std::log(x);
  return std::exp(s / static_cast<double>(v.size()));
}

}  // namespace

MeanLpResult mean_lp(const LpPopulation& pop, const MeanOptions& options) {
  if (pop.members.empty()) throw ValidationError("empty population");
  MeanLpResult res;
  const LpDsRep& first = pop.members.front();
  const size_t n_members = pop.members.size();
  if (n_members == 1) {
    res.mean = first;
    return res;
  }
  res.mean = first;
  LpDsRep& m = res.mean;
  const size_t n_spokes = first.spokes.size();
  const size_t n_nodes = first.frames.size();
  const int root = first.hierarchy.root;

  std::vector<std::string> spread_warning(n_spokes + 2 * n_nodes);
  auto check_spread = [&](size_t slot, const std::vector<UnitVec3>& pts, const UnitVec3& mean, const std::string& what) {
    if (max_spread(pts, mean) > std::numbers::pi / 4)
      spread_warning[slot] = what + " spread exceeds pi/4; the mean may not be unique";
  };

  // Tasks: spokes, then frames, then connections.
  const int n_tasks = static_cast<int>(n_spokes + 2 * n_nodes);
  FrameMeanOptions fopt = options.frame;
  fopt.direction_mean = options.direction_mean;
  parallel_for(n_tasks, resolve_threads(options.threads), [&](int task) {
    const auto t = static_cast<size_t>(task);
    std::vector<UnitVec3> dirs;
    std::vector<double> lens;
    dirs.reserve(n_members);
    lens.reserve(n_members);
    if (t < n_spokes) {
      for (const auto& s : pop.members) {
        dirs.push_back(s.spokes[t].dir);
        lens.push_back(s.spokes[t].length);
      }
      m.spokes[t].dir = direction_mean(dirs, options.direction_mean);
      m.spokes[t].length = length_mean(lens, options.length_mean);
      check_spread(t, dirs, m.spokes[t].dir, "spoke " + std::to_string(t) + " direction");
    } else if (t < n_spokes + n_nodes) {
      const size_t j = t - n_spokes;
      if (static_cast<int>(j) == root) {
        m.frames[j] = Frame::canonical();
        return;
      }
      std::vector<Frame> frames;
      frames.reserve(n_members);
      for (const auto& s : pop.members) frames.push_back(s.frames[j]);
      m.frames[j] = frame_mean(frames, fopt).frame;
    } else {
      const size_t j = t - n_spokes - n_nodes;
      if (static_cast<int>(j) == root) {
        m.connections[j] = {};
        return;
      }
      for (const auto& s : pop.members) {
        dirs.push_back(s.connections[j].dir);
        lens.push_back(s.connections[j].length);
      }
      m.connections[j].dir = direction_mean(dirs, options.direction_mean);
      m.connections[j].length = length_mean(lens, options.length_mean);
      check_spread(t, dirs, m.connections[j].dir, "connection " + std::to_string(j) + " direction");
    }
  });
  for (auto& w : spread_warning) {
    if (!w.empty()) res.warnings.push_back(std::move(w));
  }

  double size_sum = 0.0;
  for (const auto& s : pop.members) size_sum += s.lp_size;
  m.lp_size = size_sum / static_cast<double>(n_members);
  if (pop.scaled) {
    const double total = m.total_length();
    if (options.length_mean == LengthMean::Geometric || std::abs(total - 1.0) > 1e-12) {
      for (auto& s : m.spokes) s.length /= total;
      for (auto& c : m.connections) c.length /= total;
      res.renormalized = true;
    }
  } else {
    m.lp_size = m.total_length();
  }
  return res;
}

}  // namespace skelstat
