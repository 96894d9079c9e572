#ifndef SKELSTAT_SIMULATION_HPP
#define SKELSTAT_SIMULATION_HPP

// Templates, frame-rotation deformations, noise and the two-group study.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "skelstat/dsrep.hpp"
#include "skelstat/population.hpp"

namespace skelstat {

/// ds-rep of the ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1. The skeletal
/// sheet is the medial ellipse with semi-axes (a^2 - c^2)/a, (b^2 - c^2)/b
/// in z = 0. Grid columns span 0.7 of the major semi-axis, grid rows 0.8 of
/// the local half-width; each grid point carries an up and a down spoke.
/// crest_count extra points sit evenly on the fold, each with an in-plane
/// crest spoke; the two on the major axis extend the spine.
GpDsRep ellipsoid_template(int rows, int cols, double a, double b, double c, int crest_count);

enum class FrameAxis { N, B, BPerp };
FrameAxis frame_axis_from_string(const std::string& s);
std::string to_string(FrameAxis axis);

struct DeformSpec {
  std::vector<int> target_nodes;
  FrameAxis axis = FrameAxis::BPerp;
  /// One angle for all nodes, or one per node.
  std::vector<double> angles;

  double angle_for(size_t k) const { return angles.size() == 1 ? angles.front() : angles.at(k); }
  void validate(const LpDsRep& lp) const;
};

/// Rotate each target's parent-local frame by its angle about the frame's
/// own axis (right-hand rule). Everything downstream follows on reconstruction.
LpDsRep rotate_frames(const LpDsRep& lp, const DeformSpec& spec);

/// Spinal nodes next to the root on the low-column side, nearest first.
std::vector<int> default_bend_nodes(const GridLayout& grid, int count = 3);

/// The curved slab used by the study: ellipsoid_template(5, 13, 3, 2, 1, 20)
/// in LP form, with every non-root spinal frame turned about n by pi/24
/// (negative on the low-column side) so both ends curl the same way.
LpDsRep slab_template();

struct NoiseSpec {
  double kappa_frame = 600.0;
  double kappa_spoke = 250.0;
  double kappa_conn = 5000.0;
  /// Truncated normal around each template length mu: sigma = sigma_factor mu
  /// on [a_factor mu, b_factor mu]. sigma_factor = 0 keeps lengths.
  double sigma_factor = 0.02;
  double a_factor = 0.5;
  double b_factor = 1.5;

  /// Infinite concentrations and zero sigma.
  static NoiseSpec none();
  void validate() const;
};

/// vMF noise on spoke and connection directions, a random rotation on every
/// non-root frame (tilt of n by a vMF draw, then a von Mises spin about the
/// new n, both with kappa_frame) and truncated-normal lengths.
LpDsRep perturb_lp(const LpDsRep& lp, const NoiseSpec& noise, std::uint64_t seed);

struct StudySpec {
  int n_per_group = 150;
  std::vector<int> bend_nodes;  // empty: default_bend_nodes(grid, 3)
  FrameAxis bend_axis = FrameAxis::BPerp;
  double bend_mean_a = 0.0;
  double bend_mean_b = -std::numbers::pi / 15;
  double bend_kappa = 100.0;  // infinity: no spread
  NoiseSpec noise;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Two groups; member k of group g draws theta ~ vM(mean_g, kappa) from the
/// stream (seed, g, k), bends every bend node by theta, then adds noise.
std::pair<LpPopulation, LpPopulation> build_study(const LpDsRep& templ, const StudySpec& spec);

/// JSON configuration readers (schemas in docs/config.md).
StudySpec study_spec_from_json(const std::string& text);
DeformSpec deform_spec_from_json(const std::string& text);

}  // namespace skelstat

#endif  // SKELSTAT_SIMULATION_HPP
