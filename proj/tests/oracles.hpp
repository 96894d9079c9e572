#ifndef SKELSTAT_TEST_ORACLES_HPP
#define SKELSTAT_TEST_ORACLES_HPP

// Direct-from-definition statistics used to check the library. Slow and
// simple on purpose; nothing here shares code with src/.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace skelstat::testing {

/// Two-sample Hotelling T^2 of the partition given by `mask` (bit i set: row
/// i in the first group) with the pooled covariance.
inline double oracle_hotelling(const Eigen::MatrixXd& v, unsigned mask) {
  std::vector<int> ia, ib;
  for (int i = 0; i < v.rows(); ++i) ((mask >> i) & 1u ? ia : ib).push_back(i);
  const auto na = static_cast<double>(ia.size()), nb = static_cast<double>(ib.size());
  const Eigen::Index d = v.cols();
  Eigen::VectorXd ma = Eigen::VectorXd::Zero(d), mb = Eigen::VectorXd::Zero(d);
  for (int i : ia) ma += v.row(i).transpose() / na;
  for (int i : ib) mb += v.row(i).transpose() / nb;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (int i : ia) s += (v.row(i).transpose() - ma) * (v.row(i).transpose() - ma).transpose();
  for (int i : ib) s += (v.row(i).transpose() - mb) * (v.row(i).transpose() - mb).transpose();
  s /= (na + nb - 2);
  s *= (1 / na + 1 / nb);
  const Eigen::VectorXd diff = ma - mb;
  return diff.dot(s.ldlt().solve(diff));
}

struct ExhaustiveCount {
  int count = 0;
  int total = 0;
  double observed = 0.0;
};

/// Counts partitions of the 2n rows (first n observed) whose statistic
/// reaches the observed one.
inline ExhaustiveCount oracle_exhaustive(const Eigen::MatrixXd& v, int n) {
  ExhaustiveCount r;
  r.observed = oracle_hotelling(v, (1u << n) - 1);
  for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    ++r.total;
    r.count += oracle_hotelling(v, mask) >= r.observed - 1e-9 * (1 + r.observed);
  }
  return r;
}

inline double oracle_bonferroni(const std::vector<double>& p, size_t i) {
  return std::min(1.0, static_cast<double>(p.size()) * p[i]);
}

/// min over ranks r >= rank(p_i) of K p_(r) / r, capped at 1.
inline double oracle_bh(const std::vector<double>& p, size_t i) {
  std::vector<size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
  const auto pos = static_cast<size_t>(std::find(order.begin(), order.end(), i) - order.begin());
  const auto k = static_cast<double>(p.size());
  double m = 1.0;
  for (size_t r = pos; r < order.size(); ++r) m = std::min(m, k * p[order[r]] / static_cast<double>(r + 1));
  return m;
}

/// Kolmogorov-Smirnov distance to U(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const auto n = static_cast<double>(p.size());
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) d = std::max(d, std::max((i + 1) / n - p[i], p[i] - i / n));
  return d;
}

}  // namespace skelstat::testing

#endif  // SKELSTAT_TEST_ORACLES_HPP
