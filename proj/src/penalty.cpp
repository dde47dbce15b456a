#include "pspline/penalty.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pspline {

namespace {

void check_diff_order(Index p, int m) {
  if (m < 1 || m > p - 1)
    throw InvalidOrder("penalty order m=" + std::to_string(m) + " must satisfy 1 <= m <= p-1");
}

void check_spline_order(const KnotVector& kv, int m) {
  if (m < 1 || m > kv.order() - 1)
    throw InvalidOrder("penalty order m=" + std::to_string(m) + " must satisfy 1 <= m <= d-1");
}

// Gram matrix of the B-splines of `kv` over [domain_lo, domain_hi].
BandMatrixd basis_gram(const KnotVector& kv) {
  const int d = kv.order();
  const Index p = kv.num_basis();
  const GaussLegendreRule rule = gauss_legendre(d);
  BandMatrixd g(p, p, d - 1, d - 1);
  const Vectord& t = kv.knots();
  for (Index i = d - 1; i < p; ++i) {
    const double a = t(i);
    const double b = t(i + 1);
    if (!(a < b)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (Index r = 0; r < rule.nodes.size(); ++r) {
      const BasisRow row = eval_row(kv, mid + half * rule.nodes(r));
      const double w = half * rule.weights(r);
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) g.coeffRef(row.first + k, row.first + l) += w * row.values(k) * row.values(l);
    }
  }
  return g;
}

}  // namespace

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  GaussLegendreRule rule{Vectord(n), Vectord(n)};
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

PenaltyFactor standard_diff(Index p, int m) {
  check_diff_order(p, m);
  const Index q = p - m;
  Vectord coef(m + 1);
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    coef(j) = (j % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (m - j) / (j + 1);
  }
  BandMatrixd d(q, p, 0, m);
  for (Index i = 0; i < q; ++i)
    for (int j = 0; j <= m; ++j) d.coeffRef(i, i + j) = coef(j);
  return {std::move(d), m, PenaltyKind::standard_diff};
}

PenaltyFactor general_diff(const KnotVector& kv, int m) {
  check_spline_order(kv, m);
  const Vectord& t = kv.knots();
  const int d = kv.order();
  const Index p = kv.num_basis();

  // Derivative recursion on coefficient rows: after level k, row j holds the
  // coefficients of f^(k) on B_{j,d-k} (knots ξ_{j+k}..ξ_{j+d}), stored as
  // k+1 entries starting at column j. Each level also flips the sign so the
  // leading coefficient stays positive.
  Matrixd cur = Matrixd::Ones(p, 1);
  for (int k = 1; k <= m; ++k) {
    const double factor = d - k;
    const Index rows = p - k;
    Matrixd next = Matrixd::Zero(rows, k + 1);
    for (Index j = 0; j < rows; ++j) {
      const double span = t(j + d) - t(j + k);
      if (!(span > 0.0)) throw DegenerateKnots("zero knot span in general difference at row " + std::to_string(j));
      const double s = factor / span;
      for (Index c = 0; c <= k; ++c) {
        const double hi = (c >= 1) ? cur(j + 1, c - 1) : 0.0;
        const double lo = (c < k) ? cur(j, c) : 0.0;
        next(j, c) = s * (lo - hi);
      }
    }
    cur = std::move(next);
  }
  BandMatrixd out(p - m, p, 0, m);
  for (Index j = 0; j < p - m; ++j)
    for (Index c = 0; c <= m; ++c) out.coeffRef(j, j + c) = cur(j, c);
  return {std::move(out), m, PenaltyKind::general_diff};
}

BandMatrixd derivative_gram(const KnotVector& kv, int m) {
  check_spline_order(kv, m);
  const int d = kv.order();
  const Index p = kv.num_basis();
  const int degree = 2 * (d - m - 1);
  const int nodes = (degree + 2) / 2;  // ceil((degree + 1) / 2)
  const GaussLegendreRule rule = gauss_legendre(nodes);
  const Vectord& t = kv.knots();

  BandMatrixd s(p, p, d - 1, d - 1);
  for (Index i = d - 1; i < p; ++i) {
    const double a = t(i);
    const double b = t(i + 1);
    if (!(a < b)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (Index r = 0; r < rule.nodes.size(); ++r) {
      const BasisRow row = eval_row_derivative(kv, mid + half * rule.nodes(r), m);
      const double w = half * rule.weights(r);
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s.coeffRef(row.first + k, row.first + l) += w * row.values(k) * row.values(l);
    }
  }
  return s;
}

PenaltyFactor derivative_factor(const KnotVector& kv, int m) {
  check_spline_order(kv, m);
  // f^(m) = Σ γ_i B_{i,d-m} with γ = ±G_diff β, so ∫ f^(m)² = βᵀ G_diffᵀ W G_diff β
  // where W is the Gram of the order d-m basis. With W = LLᵀ, D = Lᵀ G_diff
  // is upper trapezoidal and coincides with the leading q rows of the
  // Cholesky factor of S.
  const PenaltyFactor diff = general_diff(kv, m);
  const KnotVector low = kv.derivative_knots(m);
  LowerBandMatrixd l;
  try {
    l = cholesky_band(basis_gram(low));
  } catch (const NotPositiveDefinite& e) {
    throw FactorizationFailure(std::string("derivative penalty has numerical rank below p-m: ") + e.what());
  }
  const Index q = diff.rows();
  const Index p = diff.cols();
  const Index lbw = l.bandwidth();
  const Index bw = std::min<Index>(p - 1, lbw + m);
  BandMatrixd out(q, p, 0, bw);
  // row i of D = Σ_{k=i}^{i+lbw} L(k, i) · diff row k
  for (Index i = 0; i < q; ++i) {
    const Index kend = std::min<Index>(q, i + lbw + 1);
    for (Index k = i; k < kend; ++k) {
      const double lki = l.at(k, i);
      for (Index c = diff.matrix.row_begin(k); c < diff.matrix.row_end(k); ++c)
        out.coeffRef(i, c) += lki * diff.matrix(k, c);
    }
  }
  return {std::move(out), m, PenaltyKind::derivative};
}

}  // namespace pspline
