#include "skelstat/hypothesis.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "skelstat/error.hpp"
#include "skelstat/parallel.hpp"
#include "skelstat/procrustes.hpp"
#include "skelstat/random.hpp"
#include "skelstat/reparam.hpp"

namespace skelstat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kGopKindNames[] = {"spoke_dir", "spoke_len", "frame_n",  "frame_b", "frame_bperp",
                                     "conn_dir",  "conn_len",  "position", "size"};

}  // namespace

std::string to_string(GopKind kind) { return kGopKindNames[static_cast<int>(kind)]; }

GopKind gop_kind_from_string(const std::string& s) {
  for (int i = 0; i < 9; ++i) {
    if (s == kGopKindNames[i]) return static_cast<GopKind>(i);
  }
  throw ValidationError("unknown GOP kind '" + s + "'");
}

std::string to_string(StudyMode mode) { return mode == StudyMode::Lp ? "lp" : "gp"; }
std::string to_string(Euclideanization e) { return e == Euclideanization::Pns ? "pns" : "tangent"; }

double t_statistic(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || y.size() < 2) throw ValidationError("t statistic needs at least 2 values per group");
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n1;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n2;
  double ss = 0.0;
  for (double v : x) ss += (v - mx) * (v - mx);
  for (double v : y) ss += (v - my) * (v - my);
  const double diff = mx - my;
  const double sp2 = ss / (n1 + n2 - 2.0);
  if (sp2 == 0.0) return diff == 0.0 ? 0.0 : std::copysign(kInf, diff);
  return diff / (std::sqrt(sp2) * std::sqrt(1.0 / n1 + 1.0 / n2));
}

namespace {

// Adds the ridge when S is numerically singular. Returns whether it did.
template <typename Mat>
bool regularize(Mat& s) {
  const Eigen::Index d = s.rows();
  const double tr = s.trace();
  const double det = s.determinant();
  if (det > 1e-12 * std::pow(tr / static_cast<double>(d), static_cast<double>(d))) return false;
  s.diagonal().array() += 1e-8 * tr / static_cast<double>(d);
  return true;
}

}  // namespace

double hotelling_t2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, bool* ridge) {
  if (x.cols() != y.cols()) throw ValidationError("hotelling: dimension mismatch");
  const double n1 = static_cast<double>(x.rows()), n2 = static_cast<double>(y.rows());
  if (x.rows() < 1 || y.rows() < 1 || n1 + n2 - 2.0 <= 0.0) throw ValidationError("hotelling: groups too small");
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Eigen::MatrixXd cx = x.rowwise() - mx;
  const Eigen::MatrixXd cy = y.rowwise() - my;
  Eigen::MatrixXd s = (cx.transpose() * cx + cy.transpose() * cy) / (n1 + n2 - 2.0) * (1.0 / n1 + 1.0 / n2);
  const Eigen::VectorXd diff = (mx - my).transpose();
  if (ridge) *ridge = false;
  if (!(s.trace() > 0.0)) return diff.isZero(0.0) ? 0.0 : kInf;
  const bool r = regularize(s);
  if (ridge) *ridge = r;
  return diff.dot(s.partialPivLu().solve(diff));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

namespace {

// Per-GOP data kept fixed across permutations: the pooled sample is
// centered, so a partition is fully described by the group-A sum.
struct Prepared {
  int offset = 0;
  int dim = 1;
  Eigen::VectorXd total;
  Eigen::MatrixXd scatter;
  double observed = 0.0;
  double threshold = 0.0;
  bool constant = false;
  bool degenerate = false;
  bool ridge = false;
};

template <int D>
double stat_fixed(const double* sum_a, const Prepared& g, int n1, int n2, bool* ridge) {
  using V = Eigen::Matrix<double, D, 1>;
  using M = Eigen::Matrix<double, D, D>;
  const V sa = Eigen::Map<const V>(sum_a);
  const V total = g.total.head<D>();
  const M q = g.scatter.topLeftCorner<D, D>();
  const double a = static_cast<double>(n1), b = static_cast<double>(n2);
  const V m1 = sa / a;
  const V m2 = (total - sa) / b;
  const V diff = m1 - m2;
  const M within = q - a * m1 * m1.transpose() - b * m2 * m2.transpose();
  M s = within * ((1.0 / a + 1.0 / b) / (a + b - 2.0));
  const double scale = q.trace() * ((1.0 / a + 1.0 / b) / (a + b - 2.0));
  if (!(s.trace() > 1e-12 * scale)) {
    return diff.squaredNorm() <= 1e-24 * q.trace() / (a + b) ? 0.0 : kInf;
  }
  if constexpr (D == 1) {
    return std::abs(diff(0)) / std::sqrt(s(0, 0));
  } else {
    const bool r = regularize(s);
    if (ridge && r) *ridge = true;
    return diff.dot(s.inverse() * diff);
  }
}

double stat_from_sum(const double* sum_a, const Prepared& g, int n1, int n2, bool* ridge) {
  switch (g.dim) {
    case 1: return stat_fixed<1>(sum_a, g, n1, n2, ridge);
    case 2: return stat_fixed<2>(sum_a, g, n1, n2, ridge);
    case 3: return stat_fixed<3>(sum_a, g, n1, n2, ridge);
    default: throw ValidationError("GOP dimension must be 1, 2 or 3");
  }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Count permuted statistics at or above each GOP's threshold for a batch of
// partitions given as 0/1 indicator rows.
void count_batch(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v, const std::vector<Prepared>& gops, int n1, int n2,
                 std::vector<int>& counts) {
  const RowMatrix sums = z * v;
  for (size_t gi = 0; gi < gops.size(); ++gi) {
    const Prepared& g = gops[gi];
    if (g.constant || g.degenerate) continue;
    int c = 0;
    for (Eigen::Index p = 0; p < sums.rows(); ++p) {
      if (stat_from_sum(sums.row(p).data() + g.offset, g, n1, n2, nullptr) >= g.threshold) ++c;
    }
    counts[gi] += c;
  }
}

}  // namespace

std::vector<PermutationResult> permutation_test_all(const std::vector<GopSample>& samples,
                                                    const PermutationOptions& options) {
  std::vector<PermutationResult> results(samples.size());
  if (samples.empty()) return results;
  if (options.permutations < 1) throw ValidationError("number of permutations must be at least 1");
  const int n1 = samples.front().n1;
  const int n = static_cast<int>(samples.front().values.rows());
  const int n2 = n - n1;
  if (n1 < 1 || n2 < 1 || n < 3) throw ValidationError("each group needs at least one member and N >= 3");

  std::vector<Prepared> gops(samples.size());
  int total_dim = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const GopSample& s = samples[i];
    if (s.n1 != n1 || s.values.rows() != n) throw ValidationError("GOP samples differ in group sizes");
    Prepared& g = gops[i];
    g.dim = s.dim();
    if (g.dim < 1 || g.dim > 3) throw ValidationError("GOP dimension must be 1, 2 or 3");
    g.offset = total_dim;
    total_dim += g.dim;
    g.constant = (s.values.rowwise() - s.values.row(0)).cwiseAbs().maxCoeff() == 0.0;
  }

  Eigen::MatrixXd v(n, total_dim);
  for (size_t i = 0; i < samples.size(); ++i) {
    Prepared& g = gops[i];
    const Eigen::MatrixXd centered = samples[i].values.rowwise() - samples[i].values.colwise().mean();
    v.middleCols(g.offset, g.dim) = centered;
    g.total = centered.colwise().sum().transpose();
    g.scatter = centered.transpose() * centered;
    PermutationResult& r = results[i];
    r.constant = g.constant;
    if (g.constant) continue;
    const Eigen::VectorXd sum_a = centered.topRows(n1).colwise().sum().transpose();
    g.observed = stat_from_sum(sum_a.data(), g, n1, n2, &g.ridge);
    g.degenerate = std::isinf(g.observed);
    g.threshold = g.observed - 1e-12 * (1.0 + g.observed);
    r.statistic = g.observed;
    r.degenerate = g.degenerate;
    r.ridge = g.ridge;
  }

  std::vector<int> counts(samples.size(), 0);
  const std::uint64_t partitions = binomial(n, n1);
  const bool exhaustive =
      options.exhaustive_when_possible && partitions <= static_cast<std::uint64_t>(options.permutations);
  int used = options.permutations;

  if (exhaustive) {
    used = static_cast<int>(partitions);
    std::vector<int> comb(static_cast<size_t>(n1));
    std::iota(comb.begin(), comb.end(), 0);
    constexpr int kBatch = 256;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(kBatch, n);
    int filled = 0;
    for (std::uint64_t k = 0; k < partitions; ++k) {
      for (int idx : comb) z(filled, idx) = 1.0;
      if (++filled == kBatch || k + 1 == partitions) {
        count_batch(z.topRows(filled), v, gops, n1, n2, counts);
        z.setZero();
        filled = 0;
      }
      // Next combination in lexicographic order.
      int i = n1 - 1;
      while (i >= 0 && comb[static_cast<size_t>(i)] == n - n1 + i) --i;
      if (i < 0) break;
      ++comb[static_cast<size_t>(i)];
      for (int j = i + 1; j < n1; ++j) comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
    }
  } else {
    constexpr int kBatch = 500;
    const int n_batches = (options.permutations + kBatch - 1) / kBatch;
    std::vector<std::vector<int>> batch_counts(static_cast<size_t>(n_batches), std::vector<int>(samples.size(), 0));
    parallel_for(n_batches, resolve_threads(options.threads), [&](int bi) {
      const int start = bi * kBatch;
      const int rows = std::min(kBatch, options.permutations - start);
      Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows, n);
      std::vector<int> idx(static_cast<size_t>(n));
      for (int p = 0; p < rows; ++p) {
        Rng rng(options.seed, {static_cast<std::uint64_t>(start + p)});
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n1; ++i) {
          const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
          std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
          z(p, idx[static_cast<size_t>(i)]) = 1.0;
        }
      }
      count_batch(z, v, gops, n1, n2, batch_counts[static_cast<size_t>(bi)]);
    });
    for (const auto& bc : batch_counts) {
      for (size_t i = 0; i < counts.size(); ++i) counts[i] += bc[i];
    }
  }

  for (size_t i = 0; i < samples.size(); ++i) {
    PermutationResult& r = results[i];
    r.exhaustive = exhaustive;
    r.permutations = used;
    const double denom = exhaustive ? static_cast<double>(used) : static_cast<double>(used) + 1.0;
    if (r.constant) {
      r.count = used;
      r.p_value = 1.0;
    } else if (r.degenerate) {
      r.count = 0;
      r.p_value = 1.0 / denom;
    } else {
      r.count = counts[i];
      r.p_value = exhaustive ? counts[i] / denom : (1.0 + counts[i]) / denom;
      r.p_value = std::clamp(r.p_value, 1.0 / (static_cast<double>(used) + 1.0), 1.0);
    }
  }
  return results;
}

PermutationResult permutation_test(const GopSample& sample, const PermutationOptions& options) {
  return permutation_test_all({sample}, options).front();
}

std::vector<double> adjust_bonferroni(const std::vector<double>& p) {
  const double k = static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (size_t i = 0; i < p.size(); ++i) out[i] = std::min(1.0, k * p[i]);
  return out;
}

std::vector<double> adjust_bh(const std::vector<double>& p) {
  const size_t k = p.size();
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
  std::vector<double> out(k);
  double running = 1.0;
  for (size_t r = k; r-- > 0;) {
    const double v = static_cast<double>(k) * p[order[r]] / static_cast<double>(r + 1);
    running = std::min(running, v);
    out[order[r]] = std::min(1.0, running);
  }
  return out;
}

int TestReport::count_raw() const {
  return static_cast<int>(std::count_if(gops.begin(), gops.end(), [](const GopResult& g) { return g.sig_raw; }));
}
int TestReport::count_bh() const {
  return static_cast<int>(std::count_if(gops.begin(), gops.end(), [](const GopResult& g) { return g.sig_bh; }));
}
int TestReport::count_bonf() const {
  return static_cast<int>(std::count_if(gops.begin(), gops.end(), [](const GopResult& g) { return g.sig_bonf; }));
}

void apply_adjustments(TestReport& report) {
  std::vector<double> raw;
  raw.reserve(report.gops.size());
  for (const auto& g : report.gops) raw.push_back(g.raw_p);
  const auto bh = adjust_bh(raw);
  const auto bonf = adjust_bonferroni(raw);
  for (size_t i = 0; i < report.gops.size(); ++i) {
    GopResult& g = report.gops[i];
    g.bh_p = bh[i];
    g.bonf_p = bonf[i];
    g.sig_raw = g.raw_p <= report.options.alpha;
    g.sig_bh = g.bh_p <= report.options.fdr;
    g.sig_bonf = g.bonf_p <= report.options.alpha;
  }
}

Eigen::MatrixXd euclideanize(const std::vector<UnitVec3>& dirs, Euclideanization euclid) {
  if (euclid == Euclideanization::Pns && dirs.size() >= 3) {
    try {
      return euclideanize_pns(dirs).residuals;
    } catch (const Error&) {
    }
  }
  return euclideanize_tangent(dirs).coords;
}

namespace {

bool all_identical(const std::vector<UnitVec3>& dirs) {
  for (const auto& d : dirs) {
    if (d != dirs.front()) return false;
  }
  return true;
}

// Direction GOP: constant GOPs stay all-zero, failures are recorded.
void fill_direction(GopSample& s, const std::vector<UnitVec3>& dirs, Euclideanization euclid) {
  s.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dirs.size()), 2);
  if (all_identical(dirs)) return;
  try {
    s.values = euclideanize(dirs, euclid);
  } catch (const Error& e) {
    s.error = e.what();
  }
}

struct GopPlan {
  GopId id;
  // Fills the sample; runs in parallel.
  std::function<void(GopSample&)> fill;
};

std::vector<GopSample> run_plan(std::vector<GopPlan>& plan, int n1, int threads) {
  std::vector<GopSample> samples(plan.size());
  parallel_for(static_cast<int>(plan.size()), resolve_threads(threads), [&](int i) {
    GopSample& s = samples[static_cast<size_t>(i)];
    s.id = plan[static_cast<size_t>(i)].id;
    s.n1 = n1;
    plan[static_cast<size_t>(i)].fill(s);
  });
  return samples;
}

Eigen::MatrixXd column(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<GopSample> lp_samples_impl(const std::vector<LpDsRep>& a, const std::vector<LpDsRep>& b,
                                       Euclideanization euclid, int threads) {
  if (a.empty() || b.empty()) throw ValidationError("both groups must be non-empty");
  std::vector<LpDsRep> pooled;
  std::vector<double> sizes;
  for (const auto* group : {&a, &b}) {
    for (const auto& m : *group) {
      if (!structurally_equal(m, a.front())) throw ValidationError("groups are not structurally compatible");
      pooled.push_back(m.scaled ? m : scale_lp(m));
      sizes.push_back(m.scaled ? m.lp_size : lp_size(m));
    }
  }
  const auto n_spokes = static_cast<int>(a.front().spokes.size());
  const auto n_points = static_cast<int>(a.front().frames.size());
  std::vector<GopPlan> plan;
  plan.reserve(static_cast<size_t>(lp_gop_count(n_spokes, n_points)));
  auto dirs_of = [&pooled](auto getter) {
    std::vector<UnitVec3> d;
    d.reserve(pooled.size());
    for (const auto& m : pooled) d.push_back(getter(m));
    return d;
  };
  auto lens_of = [&pooled](auto getter) {
    std::vector<double> d;
    d.reserve(pooled.size());
    for (const auto& m : pooled) d.push_back(getter(m));
    return d;
  };
  for (int i = 0; i < n_spokes; ++i) {
    const auto u = static_cast<size_t>(i);
    plan.push_back({{GopKind::SpokeDir, i}, [&, u](GopSample& s) {
                      fill_direction(s, dirs_of([u](const LpDsRep& m) { return m.spokes[u].dir; }), euclid);
                    }});
    plan.push_back({{GopKind::SpokeLen, i}, [&, u](GopSample& s) {
                      s.values = column(lens_of([u](const LpDsRep& m) { return m.spokes[u].length; }));
                    }});
  }
  const GopKind frame_kinds[3] = {GopKind::FrameN, GopKind::FrameB, GopKind::FrameBPerp};
  for (int j = 0; j < n_points; ++j) {
    const auto u = static_cast<size_t>(j);
    for (int ax = 0; ax < 3; ++ax) {
      plan.push_back({{frame_kinds[ax], j}, [&, u, ax](GopSample& s) {
                        fill_direction(
                            s, dirs_of([u, ax](const LpDsRep& m) { return UnitVec3(m.frames[u].axis(ax)); }), euclid);
                      }});
    }
    plan.push_back({{GopKind::ConnDir, j}, [&, u](GopSample& s) {
                      fill_direction(s, dirs_of([u](const LpDsRep& m) { return m.connections[u].dir; }), euclid);
                    }});
    plan.push_back({{GopKind::ConnLen, j}, [&, u](GopSample& s) {
                      s.values = column(lens_of([u](const LpDsRep& m) { return m.connections[u].length; }));
                    }});
  }
  plan.push_back({{GopKind::Size, 0}, [&](GopSample& s) { s.values = column(sizes); }});
  return run_plan(plan, static_cast<int>(a.size()), threads);
}

std::vector<GopSample> gp_samples_impl(const std::vector<GpDsRep>& a, const std::vector<GpDsRep>& b, bool scaling,
                                       Euclideanization euclid, int threads) {
  if (a.empty() || b.empty()) throw ValidationError("both groups must be non-empty");
  std::vector<const GpDsRep*> pooled;
  for (const auto* group : {&a, &b}) {
    for (const auto& m : *group) {
      if (!structurally_equal(m, a.front())) throw ValidationError("groups are not structurally compatible");
      pooled.push_back(&m);
    }
  }
  std::vector<Samples3> configs;
  configs.reserve(pooled.size());
  for (const auto* m : pooled) configs.push_back(m->skeletal_points);
  GpaOptions gopt;
  gopt.with_scaling = scaling;
  const GpaResult gpa = gpa_align(configs, gopt);

  const int n_spokes = a.front().spoke_count();
  const int n_points = a.front().point_count();
  const auto n = static_cast<Eigen::Index>(pooled.size());
  std::vector<GopPlan> plan;
  for (int j = 0; j < n_points; ++j) {
    plan.push_back({{GopKind::Position, j}, [&, j](GopSample& s) {
                      s.values.resize(n, 3);
                      for (Eigen::Index k = 0; k < n; ++k) s.values.row(k) = gpa.aligned[static_cast<size_t>(k)].row(j);
                    }});
  }
  for (int i = 0; i < n_spokes; ++i) {
    const auto u = static_cast<size_t>(i);
    plan.push_back({{GopKind::SpokeDir, i}, [&, u](GopSample& s) {
                      std::vector<UnitVec3> d;
                      for (size_t k = 0; k < pooled.size(); ++k)
                        d.push_back((gpa.rotations[k] * pooled[k]->spokes[u].dir).normalized());
                      fill_direction(s, d, euclid);
                    }});
    plan.push_back({{GopKind::SpokeLen, i}, [&, u](GopSample& s) {
                      s.values.resize(n, 1);
                      for (size_t k = 0; k < pooled.size(); ++k)
                        s.values(static_cast<Eigen::Index>(k), 0) = gpa.scales[k] * pooled[k]->spokes[u].length;
                    }});
  }
  plan.push_back({{GopKind::Size, 0}, [&](GopSample& s) {
                    s.values.resize(n, 1);
                    for (size_t k = 0; k < pooled.size(); ++k)
                      s.values(static_cast<Eigen::Index>(k), 0) = gp_size(*pooled[k], SizeBasis::Tips);
                  }});
  return run_plan(plan, static_cast<int>(a.size()), threads);
}

TestReport finish_study(const std::vector<GopSample>& samples, const StudyOptions& options, int n1, int n2,
                        int n_spokes, int n_points) {
  TestReport report;
  report.options = options;
  report.n1 = n1;
  report.n2 = n2;
  report.n_spokes = n_spokes;
  report.n_points = n_points;

  std::vector<GopSample> testable;
  std::vector<size_t> where;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].error.empty()) {
      testable.push_back(samples[i]);
      where.push_back(i);
    }
  }
  PermutationOptions popt;
  popt.permutations = options.permutations;
  popt.seed = options.seed;
  popt.threads = options.threads;
  const auto results = permutation_test_all(testable, popt);

  report.gops.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    report.gops[i].id = samples[i].id;
    report.gops[i].dim = samples[i].dim();
    report.gops[i].error = samples[i].error;
  }
  for (size_t t = 0; t < testable.size(); ++t) {
    GopResult& g = report.gops[where[t]];
    g.statistic = results[t].statistic;
    g.raw_p = results[t].p_value;
    g.degenerate = results[t].degenerate;
    g.ridge = results[t].ridge;
  }
  apply_adjustments(report);
  return report;
}

std::vector<GpDsRep> reconstruct_all(const std::vector<LpDsRep>& lps) {
  std::vector<GpDsRep> out;
  out.reserve(lps.size());
  for (const auto& lp : lps) {
    ReconstructOptions ro;
    if (lp.scaled) ro.target_size = lp.lp_size;
    out.push_back(lp_to_gp(lp, ro));
  }
  return out;
}

}  // namespace

std::vector<GopSample> lp_gop_samples(const std::vector<LpDsRep>& a, const std::vector<LpDsRep>& b,
                                      Euclideanization euclid) {
  return lp_samples_impl(a, b, euclid, 0);
}

std::vector<GopSample> gp_gop_samples(const std::vector<GpDsRep>& a, const std::vector<GpDsRep>& b, bool scaling,
                                      Euclideanization euclid) {
  return gp_samples_impl(a, b, scaling, euclid, 0);
}

TestReport run_study(const std::vector<LpDsRep>& a, const std::vector<LpDsRep>& b, const StudyOptions& options) {
  if (options.mode == StudyMode::Gp) return run_study(reconstruct_all(a), reconstruct_all(b), options);
  const auto samples = lp_samples_impl(a, b, options.euclid, options.threads);
  return finish_study(samples, options, static_cast<int>(a.size()), static_cast<int>(b.size()),
                      a.front().spoke_count(), a.front().point_count());
}

TestReport run_study(const std::vector<GpDsRep>& a, const std::vector<GpDsRep>& b, const StudyOptions& options) {
  if (options.mode == StudyMode::Lp) {
    std::vector<LpDsRep> la, lb;
    for (const auto& g : a) la.push_back(gp_to_lp(g));
    for (const auto& g : b) lb.push_back(gp_to_lp(g));
    return run_study(la, lb, options);
  }
  const auto samples = gp_samples_impl(a, b, options.scaling, options.euclid, options.threads);
  return finish_study(samples, options, static_cast<int>(a.size()), static_cast<int>(b.size()),
                      a.front().spoke_count(), a.front().point_count());
}

}  // namespace skelstat
