#include "pspline/gridsearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pspline {

std::string_view to_string(Criterion c) { return c == Criterion::gcv ? "gcv" : "reml"; }

std::vector<double> make_grid(const SearchInterval& interval, Index n) {
  if (n < 2) throw InvalidArgument("grid needs at least 2 points");
  if (!(interval.rho_lo < interval.rho_hi)) throw InvalidArgument("grid needs rho_lo < rho_hi");
  const Vectord g = Vectord::LinSpaced(n, interval.rho_lo, interval.rho_hi);
  return {g.begin(), g.end()};
}

bool CriterionCurve::ok(Index i) const { return !std::binary_search(failures.begin(), failures.end(), i); }

CriterionCurve evaluate(const PlsProblem& prob, const std::vector<double>& grid) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = grid.size();
  CriterionCurve c{grid, std::vector<double>(n, nan), std::vector<double>(n, nan), std::vector<double>(n, nan), {}};
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const PlsFit fit = solve_at(prob, grid[i]);
      c.edf[i] = fit.edf;
      c.gcv[i] = fit.gcv;
      c.reml[i] = fit.reml;
    } catch (const NumericalError&) {
      c.failures.push_back(static_cast<Index>(i));
    }
  }
  if (n > 0 && c.failures.size() == n) throw AllPointsFailed("PLS failed at every grid point");
  return c;
}

Selection select_optimum(const CriterionCurve& curve, Criterion c) {
  const auto& v = curve.values(c);
  const double sign = c == Criterion::gcv ? 1.0 : -1.0;
  std::optional<Selection> best;
  for (Index i = 0; i < curve.size(); ++i) {
    const double x = v[static_cast<std::size_t>(i)];
    if (!curve.ok(i) || !std::isfinite(x)) continue;
    if (!best || sign * x <= sign * best->value) best = Selection{curve.rhos[static_cast<std::size_t>(i)], i, x};
  }
  if (!best) throw AllPointsFailed("no successful grid point to select from");
  return *best;
}

std::optional<std::string> boundary_warning(const CriterionCurve& curve, const Selection& sel) {
  if (sel.index == 0) return "optimum at the lower end of the grid; the interval may truncate the extremum";
  if (sel.index == curve.size() - 1)
    return "optimum at the upper end of the grid; the interval may truncate the extremum";
  return std::nullopt;
}

std::vector<Index> local_optima(const CriterionCurve& curve, Criterion c) {
  const auto& v = curve.values(c);
  const double sign = c == Criterion::gcv ? 1.0 : -1.0;
  std::vector<Index> idx;
  for (Index i = 0; i < curve.size(); ++i)
    if (curve.ok(i) && std::isfinite(v[static_cast<std::size_t>(i)])) idx.push_back(i);
  std::vector<Index> out;
  // walk plateaus: a run is a minimum when it descends in and ascends out
  int last_dir = 0;
  Index run_start = 0;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double diff = sign * (v[static_cast<std::size_t>(idx[k])] - v[static_cast<std::size_t>(idx[k - 1])]);
    const int dir = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
    if (dir == 0) continue;
    if (dir > 0 && last_dir < 0) out.push_back(idx[run_start]);
    if (dir < 0) run_start = static_cast<Index>(k);
    last_dir = dir;
  }
  return out;
}

}  // namespace pspline
