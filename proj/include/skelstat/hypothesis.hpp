#ifndef SKELSTAT_HYPOTHESIS_HPP
#define SKELSTAT_HYPOTHESIS_HPP

// Two-sample permutation tests per GOP with multiplicity adjustment.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skelstat/dsrep.hpp"

namespace skelstat {

enum class GopKind { SpokeDir, SpokeLen, FrameN, FrameB, FrameBPerp, ConnDir, ConnLen, Position, Size };

std::string to_string(GopKind kind);
GopKind gop_kind_from_string(const std::string& s);

struct GopId {
  GopKind kind = GopKind::Size;
  int index = 0;

  bool operator==(const GopId&) const = default;
};

/// Pooled sample of one GOP: rows 0..n1-1 are group A, the rest group B.
/// One column for scalar GOPs, 2 or 3 for vector-valued ones.
struct GopSample {
  GopId id;
  Eigen::MatrixXd values;
  int n1 = 0;
  std::string error;  // set when the GOP could not be prepared; it is then not tested

  int dim() const { return static_cast<int>(values.cols()); }
  int n2() const { return static_cast<int>(values.rows()) - n1; }
};

/// Pooled-SD two-sample t. Zero pooled variance gives 0 when the means agree
/// and +-infinity otherwise. Needs at least 2 values per group.
double t_statistic(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Hotelling T^2 = d^T S^-1 d with S = S_pooled (1/N1 + 1/N2).
/// A singular S is replaced by S + lambda I, lambda = 1e-8 trace(S)/dim, and
/// `ridge` (if given) is set.
double hotelling_t2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, bool* ridge = nullptr);

struct PermutationOptions {
  int permutations = 10000;  // B
  std::uint64_t seed = 0;
  /// Enumerate every partition when their number does not exceed B.
  bool exhaustive_when_possible = true;
  int threads = 0;
};

struct PermutationResult {
  double statistic = 0.0;  // |t| or T^2 of the observed partition
  double p_value = 1.0;
  int count = 0;           // permuted statistics >= observed
  int permutations = 0;    // B, or the number of enumerated partitions
  bool exhaustive = false;
  bool degenerate = false; // infinite observed statistic
  bool ridge = false;
  bool constant = false;   // all pooled values identical
};

/// Monte Carlo: eta = (1 + #{T_j >= T_o}) / (B + 1). Exhaustive: eta is the
/// share of all partitions (observed included) with T >= T_o. Ties are
/// counted with a relative tolerance of 1e-12. Permutation j draws from the
/// stream (seed, j), shared by all GOPs tested together.
PermutationResult permutation_test(const GopSample& sample, const PermutationOptions& options = {});

/// Same as permutation_test for many GOPs with common group sizes, sharing
/// each permutation across all of them.
std::vector<PermutationResult> permutation_test_all(const std::vector<GopSample>& samples,
                                                    const PermutationOptions& options = {});

std::vector<double> adjust_bonferroni(const std::vector<double>& p);
std::vector<double> adjust_bh(const std::vector<double>& p);

/// Number of partitions C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

enum class StudyMode { Lp, Gp };
enum class Euclideanization { Pns, Tangent };

std::string to_string(StudyMode mode);
std::string to_string(Euclideanization e);

struct StudyOptions {
  StudyMode mode = StudyMode::Lp;
  /// GP mode: GPA with scaling. LP mode always tests scaled reps plus the LP-size.
  bool scaling = true;
  Euclideanization euclid = Euclideanization::Pns;
  int permutations = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double fdr = 0.05;
  int threads = 0;
};

struct GopResult {
  GopId id;
  int dim = 1;
  double statistic = 0.0;
  double raw_p = 1.0;
  double bh_p = 1.0;
  double bonf_p = 1.0;
  bool sig_raw = false;
  bool sig_bh = false;
  bool sig_bonf = false;
  bool degenerate = false;
  bool ridge = false;
  std::string error;  // non-empty when this GOP could not be tested
};

struct TestReport {
  StudyOptions options;
  int n1 = 0;
  int n2 = 0;
  int n_spokes = 0;
  int n_points = 0;
  std::vector<GopResult> gops;

  int k() const { return static_cast<int>(gops.size()); }
  int count_raw() const;
  int count_bh() const;
  int count_bonf() const;
};

/// Fill bh/bonf columns and significance flags from raw p-values.
void apply_adjustments(TestReport& report);

/// Build the per-GOP samples of an LP study. Members are scaled first;
/// the LP-size GOP uses each member's stored size.
std::vector<GopSample> lp_gop_samples(const std::vector<LpDsRep>& a, const std::vector<LpDsRep>& b,
                                      Euclideanization euclid);

/// Build the per-GOP samples of a GP study after pooled GPA.
std::vector<GopSample> gp_gop_samples(const std::vector<GpDsRep>& a, const std::vector<GpDsRep>& b,
                                      bool scaling, Euclideanization euclid);

/// Euclideanize one direction GOP over the pooled sample (n x 2). PNS falls
/// back to the tangent chart when the circle fit is not possible.
Eigen::MatrixXd euclideanize(const std::vector<UnitVec3>& dirs, Euclideanization euclid);

TestReport run_study(const std::vector<LpDsRep>& a, const std::vector<LpDsRep>& b, const StudyOptions& options);
TestReport run_study(const std::vector<GpDsRep>& a, const std::vector<GpDsRep>& b, const StudyOptions& options);

}  // namespace skelstat

#endif  // SKELSTAT_HYPOTHESIS_HPP
