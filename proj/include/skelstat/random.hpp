#ifndef SKELSTAT_RANDOM_HPP
#define SKELSTAT_RANDOM_HPP

// Seeded samplers. Every stream is derived from (seed, stream ids) by
// splitmix64 so parallel consumers get scheduling-independent draws.

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "skelstat/sphere.hpp"

namespace skelstat {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Hash of a seed and a list of counters.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) : state_(derive_seed(seed, ids)) {}

  std::uint64_t next() { return splitmix64(state_); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);
  double normal();

private:
  std::uint64_t state_;
};

double std_normal_cdf(double z);
/// 1 - Phi(z), accurate in the upper tail.
double std_normal_sf(double z);

/// One vMF draw on S^2 (inverse CDF on the colatitude).
Eigen::Vector3d draw_vmf_s2(const Eigen::Vector3d& mu, double kappa, Rng& rng);
/// One von Mises draw on the circle (Best-Fisher), wrapped to (-pi, pi].
/// kappa = +inf returns mu.
double draw_vmf_circle(double mu, double kappa, Rng& rng);
/// One draw of N(mu, sigma^2) truncated to [a, b] (inverse CDF).
double draw_trunc_normal(double mu, double sigma, double a, double b, Rng& rng);

std::vector<UnitVec3> sample_vmf_s2(const Eigen::Vector3d& mu, double kappa, int n, std::uint64_t seed);
std::vector<double> sample_vmf_circle(double mu, double kappa, int n, std::uint64_t seed);
std::vector<double> sample_trunc_normal(double mu, double sigma, double a, double b, int n, std::uint64_t seed);

/// Points scattered around the small circle of the given colatitude about
/// `axis`: colatitude ~ vM(colatitude, kappa_radial) reflected into [0, pi],
/// longitude ~ vM(0, kappa_angular).
std::vector<UnitVec3> small_circle_cluster(const Eigen::Vector3d& axis, double colatitude, double kappa_radial,
                                           double kappa_angular, int n, std::uint64_t seed);

/// Mean resultant length A(kappa) = coth(kappa) - 1/kappa of the vMF on S^2.
double vmf_mean_resultant_length(double kappa);

}  // namespace skelstat

#endif  // SKELSTAT_RANDOM_HPP
