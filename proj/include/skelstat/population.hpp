#ifndef SKELSTAT_POPULATION_HPP
#define SKELSTAT_POPULATION_HPP

#include <array>
#include <string>
#include <vector>

#include "skelstat/dsrep.hpp"

namespace skelstat {

struct LpPopulation {
  std::vector<LpDsRep> members;
  bool scaled = false;

  /// Checks structural identity and a common scaling state.
  static LpPopulation from_members(std::vector<LpDsRep> members);
  size_t size() const { return members.size(); }
};

/// Distance between two structurally identical LP-ds-reps:
///   d^2 = sum d_g^2(u) + sum (rho - rho')^2 + sum d_F^2(F) + sum d_g^2(v) + sum (tau - tau')^2
/// With `commensurate`, each Euclidean term is multiplied by pi before squaring.
double lp_distance(const LpDsRep& a, const LpDsRep& b, bool commensurate = false);

enum class DirectionMean { Pns, Frechet };
enum class LengthMean { Geometric, Arithmetic };
enum class InitialFrame { CentroidRotation, GeodesicMidpoint };

/// Mean direction of a sample: the PNS mean, or the Frechet mean. PNS falls
/// back to Frechet when fewer than 3 distinct points are available or the
/// circle fit fails.
UnitVec3 direction_mean(const std::vector<UnitVec3>& points, DirectionMean kind);

/// Starting frame for align_frame.
/// CentroidRotation: R(1/sqrt(3) (1,1,1), normalize(n + b + b_perp)) I~.
/// GeodesicMidpoint: n and b sit pi/4 on either side of the midpoint of the
/// geodesic from n_mean to b_mean, on that geodesic.
Frame initial_frame(const UnitVec3& n_mean, const UnitVec3& b_mean, const UnitVec3& b_perp_mean,
                    InitialFrame strategy);

struct FrameMeanOptions {
  DirectionMean direction_mean = DirectionMean::Pns;
  InitialFrame initial = InitialFrame::GeodesicMidpoint;
  double step = 0.01;        // delta
  double tolerance = 1e-8;   // epsilon
  int max_iterations = 100000;
};

struct FrameMeanResult {
  Frame frame;
  Frame initial;
  std::array<UnitVec3, 3> targets;  // per-axis means (n, b, b_perp)
  std::vector<double> objective_history;  // Delta before the first sweep, then after each sweep
  int iterations = 0;
  double objective() const { return objective_history.back(); }
};

/// Delta(F) = sqrt(sum_i d_g^2(F(i), target_i)).
double frame_objective(const Frame& f, const std::array<UnitVec3, 3>& targets);

/// Iterative frame alignment toward per-axis targets, starting at `start`.
/// Each sweep moves axis i toward target i by F <- R(F(i), U(F(i) + delta Log_{F(i)}(target_i))) F.
/// Stops when Delta < epsilon or changes by less than epsilon. A sweep that
/// would raise Delta is discarded and the iteration stops.
FrameMeanResult align_frame(const Frame& start, const std::array<UnitVec3, 3>& targets,
                            const FrameMeanOptions& options = {});

/// Component means followed by align_frame.
FrameMeanResult frame_mean(const std::vector<Frame>& frames, const FrameMeanOptions& options = {});

struct MeanOptions {
  DirectionMean direction_mean = DirectionMean::Pns;
  LengthMean length_mean = LengthMean::Geometric;
  FrameMeanOptions frame;
  int threads = 0;
};

struct MeanLpResult {
  LpDsRep mean;
  /// Lengths were rescaled so the mean has LP-size 1.
  bool renormalized = false;
  std::vector<std::string> warnings;
};

/// Per-GOP mean of a population (directions, lengths, frames).
MeanLpResult mean_lp(const LpPopulation& pop, const MeanOptions& options = {});

}  // namespace skelstat

#endif  // SKELSTAT_POPULATION_HPP
