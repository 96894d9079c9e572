#include "skelstat/simulation.hpp"

#include <json.hpp>

#include <cmath>

#include "skelstat/error.hpp"
#include "skelstat/parallel.hpp"
#include "skelstat/random.hpp"
#include "skelstat/reparam.hpp"

namespace skelstat {

GpDsRep ellipsoid_template(int rows, int cols, double a, double b, double c, int crest_count) {
  if (!(a > b && b > c && c > 0.0)) throw ValidationError("ellipsoid radii must satisfy a > b > c > 0");
  if (crest_count < 0) throw ValidationError("crest count must be non-negative");
  if (crest_count == 1) throw ValidationError("crest count must be 0 or at least 2");

  GpDsRep gp;
  GridLayout& g = gp.grid;
  g.rows = rows;
  g.cols = cols;
  if (rows % 2 == 0) throw ValidationError("grid: rows must be odd");
  if (rows < 3 || cols < 3) throw ValidationError("grid too small");
  const double am = (a * a - c * c) / a;
  const double bm = (b * b - c * c) / b;
  const int s = g.spine_row();
  const int n_grid = g.grid_size();
  gp.skeletal_points.resize(n_grid + crest_count, 3);

  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      const double x = 0.7 * am * (2.0 * col / (cols - 1) - 1.0);
      const double half = bm * std::sqrt(1.0 - (x / am) * (x / am));
      const double y = 0.8 * half * static_cast<double>(s - r) / s;
      gp.skeletal_points.row(g.index(r, col)) << x, y, 0.0;
    }
  }
  for (int j = 0; j < n_grid; ++j) {
    const Eigen::Vector3d p = gp.point(j);
    const double bx = p.x() * a * a / (a * a - c * c);
    const double by = p.y() * b * b / (b * b - c * c);
    const double bz = c * std::sqrt(std::max(0.0, 1.0 - bx * bx / (a * a) - by * by / (b * b)));
    for (int sign : {1, -1}) {
      const Eigen::Vector3d d = Eigen::Vector3d(bx, by, sign * bz) - p;
      gp.spokes.push_back({j, sign > 0 ? SpokeKind::Up : SpokeKind::Down, d.normalized(), d.norm()});
    }
  }

  // Fold points and their parents among the outer grid points.
  std::vector<int> outer;
  for (int col = 0; col < cols; ++col) {
    outer.push_back(g.index(0, col));
    outer.push_back(g.index(rows - 1, col));
  }
  outer.push_back(g.index(s, 0));
  outer.push_back(g.index(s, cols - 1));
  for (int k = 0; k < crest_count; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / crest_count;
    const Eigen::Vector3d p(am * std::cos(phi), bm * std::sin(phi), 0.0);
    const Eigen::Vector3d tip(a * std::cos(phi), b * std::sin(phi), 0.0);
    const int idx = n_grid + k;
    gp.skeletal_points.row(idx) = p.transpose();
    const Eigen::Vector3d d = tip - p;
    gp.spokes.push_back({idx, SpokeKind::Crest, d.normalized(), d.norm()});
    int best = outer.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (int o : outer) {
      const double dist = (gp.point(o) - p).norm();
      if (dist < best_d - 1e-12) {
        best_d = dist;
        best = o;
      }
    }
    g.crest_order.push_back(idx);
    g.crest_parents.push_back(best);
  }
  if (crest_count >= 2) g.spine_extensions = std::array<int, 2>{n_grid + crest_count / 2, n_grid};
  gp.validate();
  return gp;
}

FrameAxis frame_axis_from_string(const std::string& s) {
  if (s == "n") return FrameAxis::N;
  if (s == "b") return FrameAxis::B;
  if (s == "bperp" || s == "b_perp") return FrameAxis::BPerp;
  throw ValidationError("unknown frame axis '" + s + "' (expected n, b or bperp)");
}

std::string to_string(FrameAxis axis) {
  switch (axis) {
    case FrameAxis::N: return "n";
    case FrameAxis::B: return "b";
    case FrameAxis::BPerp: return "bperp";
  }
  return "bperp";
}

void DeformSpec::validate(const LpDsRep& lp) const {
  if (angles.empty()) throw ValidationError("deform: no angle given");
  if (angles.size() != 1 && angles.size() != target_nodes.size())
    throw ValidationError("deform: need one angle or one per target node");
  for (double t : angles) {
    if (!(std::abs(t) < std::numbers::pi)) throw ValidationError("deform: |angle| must be below pi");
  }
  for (int j : target_nodes) {
    if (j < 0 || j >= lp.point_count()) throw ValidationError("deform: invalid node " + std::to_string(j));
    if (j == lp.hierarchy.root) throw ValidationError("deform: the root frame is fixed (node " + std::to_string(j) + ")");
  }
}

LpDsRep rotate_frames(const LpDsRep& lp, const DeformSpec& spec) {
  spec.validate(lp);
  LpDsRep out = lp;
  const int axis = spec.axis == FrameAxis::N ? 0 : spec.axis == FrameAxis::B ? 1 : 2;
  for (size_t k = 0; k < spec.target_nodes.size(); ++k) {
    Frame& f = out.frames[static_cast<size_t>(spec.target_nodes[k])];
    const double theta = spec.angle_for(k);
    if (theta == 0.0) continue;
    f = axis_rotation(Eigen::Vector3d(f.axis(axis)), theta) * f;
  }
  return out;
}

std::vector<int> default_bend_nodes(const GridLayout& grid, int count) {
  std::vector<int> nodes;
  for (int k = 1; k <= count; ++k) {
    const int col = grid.root_col() - k;
    if (col < 0) throw ValidationError("template spine too short for " + std::to_string(count) + " bend nodes");
    nodes.push_back(grid.index(grid.spine_row(), col));
  }
  return nodes;
}

LpDsRep slab_template() {
  const LpDsRep flat = gp_to_lp(ellipsoid_template(5, 13, 3.0, 2.0, 1.0, 20));
  const GridLayout& g = flat.grid;
  DeformSpec bend;
  bend.axis = FrameAxis::N;
  for (int col = 0; col < g.cols; ++col) {
    if (col == g.root_col()) continue;
    bend.target_nodes.push_back(g.index(g.spine_row(), col));
    bend.angles.push_back(col < g.root_col() ? -std::numbers::pi / 24 : std::numbers::pi / 24);
  }
  return rotate_frames(flat, bend);
}

NoiseSpec NoiseSpec::none() {
  const double inf = std::numeric_limits<double>::infinity();
  return {inf, inf, inf, 0.0, 0.5, 1.5};
}

void NoiseSpec::validate() const {
  if (!(kappa_frame > 0 && kappa_spoke > 0 && kappa_conn > 0)) throw ValidationError("noise: concentrations must be positive");
  if (!(sigma_factor >= 0)) throw ValidationError("noise: sigma_factor must be non-negative");
  if (!(a_factor > 0 && a_factor < 1 && b_factor > 1)) throw ValidationError("noise: need 0 < a_factor < 1 < b_factor");
}

namespace {

Eigen::Vector3d noisy_dir(const Eigen::Vector3d& mu, double kappa, Rng& rng) {
  return std::isinf(kappa) ? mu : draw_vmf_s2(mu, kappa, rng);
}

double noisy_len(double mu, const NoiseSpec& noise, Rng& rng) {
  if (noise.sigma_factor == 0.0) return mu;
  return draw_trunc_normal(mu, noise.sigma_factor * mu, noise.a_factor * mu, noise.b_factor * mu, rng);
}

}  // namespace

LpDsRep perturb_lp(const LpDsRep& lp, const NoiseSpec& noise, std::uint64_t seed) {
  noise.validate();
  if (lp.scaled) throw ValidationError("perturb_lp expects an unscaled LP");
  LpDsRep out = lp;
  Rng rng(seed, {7});
  for (auto& s : out.spokes) {
    s.dir = noisy_dir(s.dir, noise.kappa_spoke, rng);
    s.length = noisy_len(s.length, noise, rng);
  }
  for (size_t j = 0; j < out.frames.size(); ++j) {
    if (static_cast<int>(j) == out.hierarchy.root) continue;
    if (!std::isinf(noise.kappa_frame)) {
      Frame& f = out.frames[j];
      const Eigen::Vector3d n = f.n();
      const Eigen::Vector3d n_new = draw_vmf_s2(n, noise.kappa_frame, rng);
      f = rotate_x_to_y_or(n, n_new, Eigen::Vector3d(f.b())) * f;
      const double spin = draw_vmf_circle(0.0, noise.kappa_frame, rng);
      f = axis_rotation(Eigen::Vector3d(f.n()), spin) * f;
    }
    Connection& c = out.connections[j];
    c.dir = noisy_dir(c.dir, noise.kappa_conn, rng);
    c.length = noisy_len(c.length, noise, rng);
  }
  out.lp_size = out.total_length();
  return out;
}

std::pair<LpPopulation, LpPopulation> build_study(const LpDsRep& templ, const StudySpec& spec) {
  if (templ.scaled) throw ValidationError("study template must be unscaled");
  if (spec.n_per_group < 1) throw ValidationError("study: n_per_group must be positive");
  spec.noise.validate();
  if (!(spec.bend_kappa > 0)) throw ValidationError("study: bend kappa must be positive");
  const std::vector<int> nodes = spec.bend_nodes.empty() ? default_bend_nodes(templ.grid, 3) : spec.bend_nodes;
  const double means[2] = {spec.bend_mean_a, spec.bend_mean_b};
  const int n = spec.n_per_group;
  std::vector<LpDsRep> members(static_cast<size_t>(2 * n));
  parallel_for(2 * n, resolve_threads(spec.threads), [&](int i) {
    const int group = i / n, k = i % n;
    Rng rng(spec.seed, {static_cast<std::uint64_t>(group), static_cast<std::uint64_t>(k)});
    const double theta = draw_vmf_circle(means[group], spec.bend_kappa, rng);
    DeformSpec bend{nodes, spec.bend_axis, {theta}};
    const LpDsRep bent = rotate_frames(templ, bend);
    members[static_cast<size_t>(i)] =
        perturb_lp(bent, spec.noise,
                   derive_seed(spec.seed, {static_cast<std::uint64_t>(group), static_cast<std::uint64_t>(k), 1}));
  });
  std::vector<LpDsRep> a(members.begin(), members.begin() + n), b(members.begin() + n, members.end());
  return {LpPopulation::from_members(std::move(a)), LpPopulation::from_members(std::move(b))};
}

namespace {

using json = nlohmann::json;

double real_or_inf(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ValidationError("expected a number or \"inf\", got '" + s + "'");
  }
  return j.get<double>();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

StudySpec study_spec_from_json(const std::string& text) {
  const json j = parse(text);
  StudySpec spec;
  try {
    spec.n_per_group = j.value("n_per_group", spec.n_per_group);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("bend")) {
      const json& b = j.at("bend");
      if (b.contains("nodes")) spec.bend_nodes = b.at("nodes").get<std::vector<int>>();
      if (b.contains("axis")) spec.bend_axis = frame_axis_from_string(b.at("axis").get<std::string>());
      if (b.contains("mean_a")) spec.bend_mean_a = b.at("mean_a").get<double>();
      if (b.contains("mean_b")) spec.bend_mean_b = b.at("mean_b").get<double>();
      if (b.contains("kappa")) spec.bend_kappa = real_or_inf(b.at("kappa"));
    }
    if (j.contains("noise")) {
      const json& nz = j.at("noise");
      if (nz.is_null()) {
        spec.noise = NoiseSpec::none();
      } else {
        if (nz.contains("kappa_frame")) spec.noise.kappa_frame = real_or_inf(nz.at("kappa_frame"));
        if (nz.contains("kappa_spoke")) spec.noise.kappa_spoke = real_or_inf(nz.at("kappa_spoke"));
        if (nz.contains("kappa_conn")) spec.noise.kappa_conn = real_or_inf(nz.at("kappa_conn"));
        spec.noise.sigma_factor = nz.value("sigma_factor", spec.noise.sigma_factor);
        spec.noise.a_factor = nz.value("a_factor", spec.noise.a_factor);
        spec.noise.b_factor = nz.value("b_factor", spec.noise.b_factor);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("study config: ") + e.what());
  }
  spec.noise.validate();
  return spec;
}

DeformSpec deform_spec_from_json(const std::string& text) {
  const json j = parse(text);
  DeformSpec spec;
  try {
    spec.target_nodes = j.at("nodes").get<std::vector<int>>();
    spec.axis = frame_axis_from_string(j.value("axis", std::string("bperp")));
    if (j.contains("angles")) {
      spec.angles = j.at("angles").get<std::vector<double>>();
    } else {
      spec.angles = {j.at("angle").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("deform spec: ") + e.what());
  }
  return spec;
}

}  // namespace skelstat
