#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pspline/interval.hpp"
#include "pspline/pls.hpp"

namespace pspline {

enum class Criterion { gcv, reml };

std::string_view to_string(Criterion c);

/// N equally spaced ρ from rho_lo to rho_hi inclusive.
std::vector<double> make_grid(const SearchInterval& interval, Index n);

/// Criterion values over a ρ grid. Failed points hold NaN.
struct CriterionCurve {
  std::vector<double> rhos;
  std::vector<double> edf;
  std::vector<double> gcv;
  std::vector<double> reml;
  std::vector<Index> failures;

  Index size() const noexcept { return static_cast<Index>(rhos.size()); }
  bool ok(Index i) const;
  const std::vector<double>& values(Criterion c) const { return c == Criterion::gcv ? gcv : reml; }
};

/// Solves the PLS problem at every grid point; unsolvable points are recorded.
CriterionCurve evaluate(const PlsProblem& prob, const std::vector<double>& grid);

struct Selection {
  double rho = 0.0;
  Index index = 0;
  double value = 0.0;
};

/// Minimum GCV or maximum REML; ties go to the larger ρ.
Selection select_optimum(const CriterionCurve& curve, Criterion c);

std::optional<std::string> boundary_warning(const CriterionCurve& curve, const Selection& sel);

/// Indices of strict-or-flat discrete local minima of GCV (maxima of REML)
/// among successful points, found from sign changes of the differences.
std::vector<Index> local_optima(const CriterionCurve& curve, Criterion c);

}  // namespace pspline
