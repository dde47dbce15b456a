#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pspline/band.hpp"

namespace pspline {

/// Non-decreasing knot sequence ξ_1..ξ_{p+d} for p B-splines of order d.
/// The spline domain is [ξ_d, ξ_{p+1}].
class KnotVector {
 public:
  KnotVector(Vectord knots, int order);

  int order() const noexcept { return order_; }
  Index num_basis() const noexcept { return knots_.size() - order_; }
  const Vectord& knots() const noexcept { return knots_; }
  double operator[](Index k) const noexcept { return knots_(k); }
  Index size() const noexcept { return knots_.size(); }

  double domain_lo() const noexcept { return knots_(order_ - 1); }
  double domain_hi() const noexcept { return knots_(num_basis()); }

  /// Knots ξ_{m+1}..ξ_{p+d-m}: the basis of order d-m that carries f^(m).
  KnotVector derivative_knots(int m) const;

 private:
  Vectord knots_;
  int order_;
};

/// Nonzero B-spline values at one x: B_{first}..B_{first+d-1}.
struct BasisRow {
  Index first = 0;
  Vectord values;
};

using DesignMatrix = RowBandMatrixd;

/// ξ_k = k, k = 1..p+d.
KnotVector equidistant_knots(Index p, int d);

/// ξ_k ~ N(k, ((p+d)/10)²), sorted ascending.
KnotVector random_knots(Index p, int d, std::uint64_t seed);

/// `k_total` knots at equally spaced sample quantiles of x (linear
/// interpolation between order statistics), duplicate quantiles collapsed,
/// boundary knots repeated d times.
KnotVector quantile_knots(std::span<const double> x, Index k_total, int d);

/// Sample quantile at probability `prob` of sorted data (linear interpolation).
double quantile_sorted(std::span<const double> sorted, double prob);

/// Index μ of the knot span [ξ_μ, ξ_{μ+1}) containing x (0-based), clipped to
/// the last non-empty span at the right end of the domain.
Index find_span(const KnotVector& kv, double x);

/// Cox–de Boor evaluation of the d nonzero B-splines at x.
BasisRow eval_row(const KnotVector& kv, double x);

/// m-th derivatives of the d B-splines that are nonzero around x.
BasisRow eval_row_derivative(const KnotVector& kv, double x, int m);

DesignMatrix design_matrix(const KnotVector& kv, std::span<const double> xs);

/// `count_per_interval` uniform draws inside each non-empty knot interval of
/// the domain, sorted.
std::vector<double> xs_between_knots(const KnotVector& kv, Index count_per_interval, std::uint64_t seed);

}  // namespace pspline
