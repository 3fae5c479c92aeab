#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stla/classify.hpp"
#include "stla/system.hpp"

namespace stla {

struct ControlPair {
  Control a1, a2;
};

/// Brute-force minimum-time search plan. Deltas are stored decreasing and the
/// switch grid stays below horizon/2.
struct SweepPlan {
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> deltas;
  std::vector<ControlPair> candidates;
  std::vector<double> switch_times;
  double horizon = 1.0;
  double step = 1e-3;
};

std::vector<double> log_spaced(double lo, double hi, int count);

/// 32 log-spaced switch times in [1e-4, horizon/2].
std::vector<double> default_switch_times(double horizon, int count = 32);

/// Candidate pairs: the classifier witness, its negation, and seeded random
/// unit pairs for ball-constrained kinds; every ordered listed pair for
/// general systems.
std::vector<ControlPair> candidate_pairs(const SystemSpec& sys, const AnalysisReport& report,
                                         int n_random = 16, std::uint64_t seed = 0x5eed0f17ULL);

/// First time the trajectory (a1 until switch_time, a2 after) satisfies
/// u <= level, refined by bisection inside the crossing step; nullopt when the
/// horizon passes without a crossing.
std::optional<double> hitting_time(const SystemSpec& sys, const Expr& u, double level,
                                   const Eigen::VectorXd& x0, const Control& a1, const Control& a2,
                                   double switch_time, double horizon, double h);

struct OracleResult {
  std::optional<double> time;
  ControlPair pair;
  double switch_time = 0.0;
};

/// Minimum of hitting_time over candidate pairs and the switch grid.
OracleResult oracle_min_time(const SystemSpec& sys, const Expr& u, double level,
                             const Eigen::VectorXd& x0, const SweepPlan& plan);

struct SweepRecord {
  int direction = 0;
  double delta = 0.0;
  std::optional<double> time;
  ControlPair pair;
  double switch_time = 0.0;
  double distance = -1.0;  // analytic target distance when available
};

struct PowerFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
};

struct MinTimeEstimate {
  std::vector<SweepRecord> records;
  bool fit_ok = false;
  PowerFit fit;                          // log T against log delta
  std::optional<PowerFit> distance_fit;  // log T against log d(x), analytic targets only
  double envelope_max = 0.0;             // max T / sqrt(delta)
  double envelope_slope = 0.0;           // linear trend of T/sqrt(delta) against log delta
  double unreached_fraction = 0.0;
};

/// Runs the oracle from xbar + delta * dir for every (direction, delta) and
/// fits the hitting-time scaling.
MinTimeEstimate exponent_sweep(const SystemSpec& sys, const TargetSpec& target,
                               const Eigen::VectorXd& xbar, const SweepPlan& plan);

/// CSV columns: direction_id, delta, T_star, a1_1..a1_m, a2_1..a2_m,
/// switch_time, reached.
void write_sweep_csv(std::ostream& out, const SystemSpec& sys, const MinTimeEstimate& estimate);

}  // namespace stla
