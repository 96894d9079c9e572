#include "skelstat/random.hpp"

#include <cmath>
#include <limits>

namespace skelstat {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t id : ids) {
    state = h ^ (id + 0x632BE59BD9B4E019ULL);
    h = splitmix64(state);
  }
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Box-Muller, one value per call.
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

Eigen::Vector3d draw_vmf_s2(const Eigen::Vector3d& mu, double kappa, Rng& rng) {
  const double u = rng.uniform_pos();
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  // 1 - w = -log(u + (1 - u) exp(-2 kappa)) / kappa, kept in this form for large kappa.
  double one_minus_w = std::isinf(kappa) ? 0.0 : -std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  one_minus_w = std::clamp(one_minus_w, 0.0, 2.0);
  const double w = 1.0 - one_minus_w;
  const double s = std::sqrt(one_minus_w * (2.0 - one_minus_w));
  const Eigen::Vector3d local(s * std::cos(phi), s * std::sin(phi), w);
  return (rotate_x_to_y_or(kNorthPole, mu.normalized(), Eigen::Vector3d::UnitX()) * local).normalized();
}

double draw_vmf_circle(double mu, double kappa, Rng& rng) {
  if (std::isinf(kappa)) return wrap_angle(mu);
  if (kappa > 1e8) return wrap_angle(mu + rng.normal() / std::sqrt(kappa));
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform_pos();
    const double u3 = rng.uniform();
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(mu + (u3 < 0.5 ? -theta : theta));
    }
  }
}

double draw_trunc_normal(double mu, double sigma, double a, double b, Rng& rng) {
  if (!(a < b)) throw ValidationError("truncated normal: empty interval");
  if (!(sigma > 0.0)) throw ValidationError("truncated normal: sigma must be positive");
  const double alpha = (a - mu) / sigma;
  const double beta = (b - mu) / sigma;
  const double u = rng.uniform();
  // Invert in whichever tail keeps the probabilities away from 1.
  const bool upper = alpha > 0.0;
  const double pa = upper ? std_normal_sf(alpha) : std_normal_cdf(alpha);
  const double pb = upper ? std_normal_sf(beta) : std_normal_cdf(beta);
  const double target = pa + u * (pb - pa);
  double lo = alpha, hi = beta;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = upper ? std_normal_sf(mid) : std_normal_cdf(mid);
    const bool below_target = upper ? pm > target : pm < target;
    (below_target ? lo : hi) = mid;
  }
  return std::clamp(mu + sigma * 0.5 * (lo + hi), a, b);
}

std::vector<UnitVec3> sample_vmf_s2(const Eigen::Vector3d& mu, double kappa, int n, std::uint64_t seed) {
  if (!(kappa > 0.0)) throw ValidationError("vMF: kappa must be positive");
  Rng rng(seed, {0});
  std::vector<UnitVec3> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(draw_vmf_s2(mu, kappa, rng));
  return out;
}

std::vector<double> sample_vmf_circle(double mu, double kappa, int n, std::uint64_t seed) {
  if (!(kappa > 0.0)) throw ValidationError("von Mises: kappa must be positive");
  Rng rng(seed, {1});
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(draw_vmf_circle(mu, kappa, rng));
  return out;
}

std::vector<double> sample_trunc_normal(double mu, double sigma, double a, double b, int n, std::uint64_t seed) {
  Rng rng(seed, {2});
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(draw_trunc_normal(mu, sigma, a, b, rng));
  return out;
}

std::vector<UnitVec3> small_circle_cluster(const Eigen::Vector3d& axis, double colatitude, double kappa_radial,
                                           double kappa_angular, int n, std::uint64_t seed) {
  if (!(colatitude > 0.0 && colatitude < std::numbers::pi / 2))
    throw ValidationError("small circle cluster: colatitude must lie in (0, pi/2)");
  const Eigen::Vector3d a = axis.normalized();
  const Eigen::Vector3d e1 = any_orthogonal(a);
  const Eigen::Vector3d e2 = a.cross(e1);
  Rng rng(seed, {3});
  std::vector<UnitVec3> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double theta = std::abs(draw_vmf_circle(colatitude, kappa_radial, rng));
    const double phi = draw_vmf_circle(0.0, kappa_angular, rng);
    out.push_back((std::cos(theta) * a + std::sin(theta) * (std::cos(phi) * e1 + std::sin(phi) * e2)).normalized());
  }
  return out;
}

double vmf_mean_resultant_length(double kappa) {
  if (kappa < 1e-4) return kappa / 3.0;
  return 1.0 / std::tanh(kappa) - 1.0 / kappa;
}

}  // namespace skelstat
