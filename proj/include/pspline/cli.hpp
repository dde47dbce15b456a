#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pspline/basis.hpp"
#include "pspline/gridsearch.hpp"
#include "pspline/interval.hpp"
#include "pspline/penalty.hpp"

namespace pspline::cli {

enum class ExitCode : int { ok = 0, usage = 2, data = 3, numerical = 4 };

enum class PenaltyChoice { gps, sps, os };
enum class CriterionChoice { gcv, reml, both };
enum class Format { json, csv };

struct SmoothConfig {
  std::string input;
  std::string x_col = "x";
  std::string y_col = "y";
  std::string w_col;  // empty: unweighted
  int degree = 4;
  PenaltyChoice penalty = PenaltyChoice::gps;
  int order = 2;
  std::optional<Index> knots;  // total knot count, overrides knot_frac
  double knot_frac = 0.25;
  double kappa = kDefaultKappa;
  IntervalMode mode = IntervalMode::heuristic_preferred;
  Index grid = 100;
  CriterionChoice criterion = CriterionChoice::both;
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
  Format format = Format::json;
};

/// Columns read from a CSV file. ISO dates in the x column become day
/// offsets from the earliest date.
struct Table {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  bool x_is_date = false;
  std::string first_date;
};

Table read_table(std::istream& in, const SmoothConfig& cfg);
Table read_table(const SmoothConfig& cfg);

/// Quantile knots for the data: round(n·frac) knots unless a count is given.
KnotVector knots_for(const Table& t, const SmoothConfig& cfg);
PenaltyFactor penalty_for(const KnotVector& kv, const SmoothConfig& cfg);

std::string cmd_interval(const SmoothConfig& cfg);
std::string cmd_fit(const SmoothConfig& cfg);
std::string cmd_curves(const SmoothConfig& cfg);

struct SimulateConfig {
  std::vector<int> scenarios = {1, 2, 3, 4, 5, 6, 7, 8};
  Index p = 50;
  int d = 4;
  int m = 2;
  int reps = 200;
  std::uint64_t seed = 1;
  double kappa = kDefaultKappa;
  Format format = Format::json;
  std::string output;
};

std::string cmd_simulate(const SimulateConfig& cfg);

struct BenchConfig {
  std::vector<Index> p_list = {250, 500, 1000, 2000};
  int reps = 5;
  std::uint64_t seed = 1;
  Format format = Format::csv;
  std::string output;
};

std::string cmd_bench(const BenchConfig& cfg, std::ostream& log);

/// Parses argv, runs one verb and writes its output. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pspline::cli
