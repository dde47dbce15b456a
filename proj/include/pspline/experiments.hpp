#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pspline/basis.hpp"
#include "pspline/interval.hpp"
#include "pspline/penalty.hpp"

namespace pspline {

/// One of the 8 simulation settings. Bits of id−1: derivative penalty (1),
/// equidistant knots (2), weighted data (4).
struct Scenario {
  int id = 1;
  bool derivative_penalty = false;
  bool equidistant_knots = false;
  bool weighted_data = false;

  static Scenario from_id(int id);
};

/// Inputs of one simulated replication.
struct Replication {
  KnotVector kv;
  std::vector<double> x;
  std::vector<double> w;  // empty when unweighted
  DesignMatrix b;
  PenaltyFactor d;
};

/// Knots, 10 x values per knot interval, Beta(3,3) weights if flagged.
Replication make_replication(const Scenario& sc, Index p, int d, int m, std::uint64_t seed);

struct ReplicationResult {
  std::uint64_t seed = 0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double lambda_mean = 0.0;
  bool singular = false;
  double rho_max = 0.0;       // exact, from the full spectrum
  double rho_star_max = 0.0;  // wide bound
  std::optional<double> rho_hat_max;
  double p_star = 0.0;  // 1 − redf(ρ*_max)/q
  std::optional<double> p_hat;
};

/// Coverage statistics P(ρ*_max) and P(ρ̂_max), true spectrum as reference.
ReplicationResult replication_coverage(const Replication& rep, double kappa, std::uint64_t seed);

struct CoverageReport {
  int scenario = 1;
  Index p = 0;
  int d = 4;
  int m = 2;
  int reps = 0;
  std::uint64_t seed = 0;
  double kappa = kDefaultKappa;
  std::vector<ReplicationResult> results;
  int heuristic_failures = 0;
  int construction_failures = 0;
};

/// Replication r uses seed + r.
CoverageReport run_scenario(const Scenario& sc, Index p, int d, int m, int reps, std::uint64_t seed,
                            double kappa = kDefaultKappa);

std::string to_json(const CoverageReport& r);
/// One row per replication.
std::string to_csv(const CoverageReport& r);

struct Density {
  double lo = 0.9;
  double hi = 1.0;
  std::vector<int> counts;
  std::vector<double> density;
  int below = 0;  // samples under lo
  double reference = 0.99;
  double mean_p_star = 0.0;
};

/// 50-bin histogram of P(ρ̂_max) on [0.9, 1].
Density coverage_density(const CoverageReport& r, int bins = 50);

struct BenchRow {
  Index p = 0;
  double wide_heuristic = 0.0;  // seconds, median
  double exact = 0.0;
  double grid20 = 0.0;
};

/// Median wall times over `reps` for the three paths; cubic splines,
/// second-order differences, equidistant knots.
std::vector<BenchRow> bench_intervals(const std::vector<Index>& p_list, int reps, std::uint64_t seed = 1);

/// Least-squares slope of log t against log p.
double loglog_slope(const std::vector<double>& p, const std::vector<double>& t);

std::string to_csv(const std::vector<BenchRow>& rows);

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
};

/// sin(2πx) plus a small fast oscillation and noise on [0, 1]. Its GCV curve
/// has one minimum that fits the oscillation and one that smooths it out.
Dataset two_scale_data(Index n = 400, std::uint64_t seed = 7, double amp = 0.18, double cycles = 15.0,
                       double sd = 0.5);

}  // namespace pspline
