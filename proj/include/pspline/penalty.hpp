#pragma once

#include "pspline/band.hpp"
#include "pspline/basis.hpp"

namespace pspline {

enum class PenaltyKind { standard_diff, general_diff, derivative };

/// The (p-m)×p factor D_m of a penalty S = D_mᵀD_m. D is upper trapezoidal:
/// row i has its first stored entry in column i, with `upper_bandwidth()`
/// entries to its right. Every constructor below yields this orientation,
/// which is what makes the leading q×q block of L⁻¹Dᵀ lower triangular.
struct PenaltyFactor {
  BandMatrixd matrix;
  int order = 0;
  PenaltyKind kind = PenaltyKind::standard_diff;

  Index rows() const noexcept { return matrix.rows(); }
  Index cols() const noexcept { return matrix.cols(); }
  /// S = DᵀD in band form.
  BandMatrixd gram() const { return gram_band(matrix); }
};

/// m-th order difference matrix; row i holds (-1)^j·C(m, j) at column i+j.
PenaltyFactor standard_diff(Index p, int m);

/// Maps B-spline coefficients to (-1)^m times the coefficients of f^(m) in the
/// order d-m basis. On knots ξ_k = k it equals standard_diff exactly.
PenaltyFactor general_diff(const KnotVector& kv, int m);

/// S_jk = ∫ B_j^(m)(x) B_k^(m)(x) dx over the spline domain, by Gauss–Legendre
/// quadrature that is exact for the piecewise-polynomial integrand.
BandMatrixd derivative_gram(const KnotVector& kv, int m);

/// Factor D with DᵀD = derivative_gram(kv, m), upper trapezoidal with a
/// positive leading diagonal (the unique such factor).
PenaltyFactor derivative_factor(const KnotVector& kv, int m);

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  Vectord nodes;
  Vectord weights;
};
GaussLegendreRule gauss_legendre(int n);

}  // namespace pspline
