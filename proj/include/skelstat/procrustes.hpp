#ifndef SKELSTAT_PROCRUSTES_HPP
#define SKELSTAT_PROCRUSTES_HPP

// Generalized Procrustes analysis of point configurations (rows are points).

#include <vector>

#include "skelstat/sphere.hpp"

namespace skelstat {

/// Proper rotation R minimizing |X R^T - Y|_F for centered X, Y.
Eigen::Matrix3d kabsch_rotation(const Samples3& x, const Samples3& y);

struct GpaOptions {
  bool with_scaling = true;
  double tolerance = 1e-10;  // on |mean change|_F
  int max_iterations = 100;
};

struct GpaResult {
  /// aligned[i] = scales[i] * (configs[i] - centroids[i]) * rotations[i]^T
  std::vector<Samples3> aligned;
  std::vector<Eigen::Matrix3d> rotations;
  std::vector<double> scales;
  std::vector<Eigen::RowVector3d> centroids;
  Samples3 mean;
  /// Sum of squared distances to the mean after each iteration.
  std::vector<double> objective_history;
  int iterations = 0;
};

/// Throws ValidationError on fewer than 2 configurations, mismatched point
/// counts or a degenerate (zero-size) configuration.
GpaResult gpa_align(const std::vector<Samples3>& configs, const GpaOptions& options = {});

}  // namespace skelstat

#endif  // SKELSTAT_PROCRUSTES_HPP
