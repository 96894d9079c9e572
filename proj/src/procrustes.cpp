#include "skelstat/procrustes.hpp"

#include <Eigen/SVD>

namespace skelstat {

Eigen::Matrix3d kabsch_rotation(const Samples3& x, const Samples3& y) {
  const Eigen::Matrix3d h = x.transpose() * y;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return v * d * u.transpose();
}

namespace {

double sum_sq_to_mean(const std::vector<Samples3>& aligned, const Samples3& mean) {
  double s = 0.0;
  for (const auto& a : aligned) s += (a - mean).squaredNorm();
  return s;
}

Samples3 average(const std::vector<Samples3>& configs) {
  Samples3 m = Samples3::Zero(configs.front().rows(), 3);
  for (const auto& c : configs) m += c;
  return m / static_cast<double>(configs.size());
}

}  // namespace

GpaResult gpa_align(const std::vector<Samples3>& configs, const GpaOptions& options) {
  if (configs.size() < 2) throw ValidationError("GPA needs at least 2 configurations");
  const Eigen::Index n_points = configs.front().rows();
  GpaResult res;
  const size_t n = configs.size();
  std::vector<Samples3> centered(n);
  res.centroids.resize(n);
  res.scales.assign(n, 1.0);
  for (size_t i = 0; i < n; ++i) {
    if (configs[i].rows() != n_points) throw ValidationError("GPA: configurations differ in point count");
    res.centroids[i] = configs[i].colwise().mean();
    centered[i] = configs[i].rowwise() - res.centroids[i];
    const double size = centered[i].norm();
    if (!(size > 1e-12)) throw ValidationError("degenerate configuration " + std::to_string(i));
    if (options.with_scaling) {
      res.scales[i] = 1.0 / size;
      centered[i] *= res.scales[i];
    }
  }

  res.rotations.assign(n, Eigen::Matrix3d::Identity());
  res.aligned = centered;
  Samples3 reference = centered.front();
  for (int it = 0; it < options.max_iterations; ++it) {
    for (size_t i = 0; i < n; ++i) {
      res.rotations[i] = kabsch_rotation(centered[i], reference);
      res.aligned[i] = centered[i] * res.rotations[i].transpose();
    }
    const Samples3 mean = average(res.aligned);
    res.objective_history.push_back(sum_sq_to_mean(res.aligned, mean));
    ++res.iterations;
    const double change = (mean - reference).norm();
    reference = mean;
    if (it > 0 && change < options.tolerance) break;
  }
  res.mean = reference;
  return res;
}

}  // namespace skelstat
