#include "pspline/pls.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pspline {

namespace {

// D Dᵀ for an upper-trapezoidal band factor; symmetric with bandwidth ku(D).
BandMatrixd row_gram(const BandMatrixd& d) {
  const Index q = d.rows();
  const Index bw = d.upper_bandwidth() + d.lower_bandwidth();
  BandMatrixd out(q, q, bw, bw);
  for (Index i = 0; i < q; ++i) {
    for (Index j = std::max<Index>(0, i - bw); j <= i; ++j) {
      const Index c0 = std::max(d.row_begin(i), d.row_begin(j));
      const Index c1 = std::min(d.row_end(i), d.row_end(j));
      double s = 0.0;
      for (Index c = c0; c < c1; ++c) s += d(i, c) * d(j, c);
      out.coeffRef(i, j) = s;
      out.coeffRef(j, i) = s;
    }
  }
  return out;
}

}  // namespace

PlsProblem::PlsProblem(const DesignMatrix& b, std::span<const double> y,
                       std::optional<std::span<const double>> weights, PenaltyFactor penalty)
    : penalty_(std::move(penalty)) {
  const Index n = b.rows();
  if (static_cast<Index>(y.size()) != n) throw InvalidDimensions("response length differs from design rows");
  if (penalty_.cols() != b.cols) throw InvalidDimensions("penalty columns differ from design columns");
  if (weights && static_cast<Index>(weights->size()) != n)
    throw InvalidDimensions("weight length differs from design rows");

  y_ = Vectord::Map(y.data(), n);
  if (weights) {
    Vectord sw(n);
    for (Index i = 0; i < n; ++i) {
      const double w = (*weights)[i];
      if (!(w >= 0.0)) throw InvalidArgument("weights must be non-negative");
      sw(i) = std::sqrt(w);
    }
    b_ = b.scaled_rows(sw);
    y_ = y_.cwiseProduct(sw);
  } else {
    b_ = b;
  }

  btb_ = pspline::btb(b_);
  s_ = penalty_.gram();
  bty_ = b_.transpose_times(y_);
  try {
    l_ = cholesky_band(btb_);
  } catch (const NotPositiveDefinite& e) {
    throw RankDeficientDesign("BᵀWB is not positive definite at pivot " + std::to_string(e.pivot()) +
                              "; some B-spline has no data support or p >= n");
  }
  // Rows of D can differ in scale by many orders of magnitude on uneven
  // knots; factor the unit-diagonal equilibration and add the scales back.
  BandMatrixd ddt = row_gram(penalty_.matrix);
  Vectord scale(ddt.rows());
  for (Index i = 0; i < ddt.rows(); ++i) scale(i) = 1.0 / std::sqrt(ddt(i, i));
  for (Index j = 0; j < ddt.cols(); ++j)
    for (Index i = ddt.col_begin(j); i < ddt.col_end(j); ++i) ddt.coeffRef(i, j) *= scale(i) * scale(j);
  try {
    log_det_ddt_ = log_det_from_factor(cholesky_band(ddt)) - 2.0 * scale.array().log().sum();
  } catch (const NotPositiveDefinite&) {
    throw FactorizationFailure("penalty factor does not have full row rank");
  }
}

double edf_from_factors(const LowerBandMatrixd& k, const LowerBandMatrixd& l) {
  const Index p = l.dim();
  const Index bw = l.bandwidth();
  Vectord col(p);
  double total = 0.0;
  for (Index j = 0; j < p; ++j) {
    const Index end = std::min(p, j + bw + 1);
    col.segment(j, p - j).setZero();
    for (Index i = j; i < end; ++i) col(i) = l.at(i, j);
    solve_lower_band_inplace(k, col, j);
    total += col.segment(j, p - j).squaredNorm();
  }
  return total;
}

PlsFit solve_at(const PlsProblem& prob, double rho) {
  if (!std::isfinite(rho)) throw InvalidArgument("rho must be finite");
  const double lambda = std::exp(rho);
  LowerBandMatrixd k;
  try {
    k = cholesky_band(add_scaled(prob.btb(), lambda, prob.penalty_gram()));
  } catch (const NotPositiveDefinite& e) {
    throw NumericallyUnsolvable("BᵀB + e^rho·S is not numerically positive definite at rho=" + std::to_string(rho) +
                                " (pivot " + std::to_string(e.pivot()) + ")");
  }

  PlsFit fit;
  fit.rho = rho;
  fit.beta_hat = prob.bty();
  solve_lower_band_inplace(k, fit.beta_hat);
  solve_upper_band_inplace(k, fit.beta_hat);
  fit.y_hat = prob.design() * fit.beta_hat;
  fit.rss = (prob.response() - fit.y_hat).squaredNorm();
  fit.edf = edf_from_factors(k, prob.factor());
  fit.log_det_c = log_det_from_factor(k);
  fit.gcv = gcv_of(fit, prob.n());
  fit.sigma2_hat = fit.rss / (static_cast<double>(prob.n()) - fit.edf);
  fit.reml = reml_of(prob, fit);
  return fit;
}

double gcv_of(const PlsFit& fit, Index n) {
  const double nd = static_cast<double>(n);
  if (!(fit.edf < nd)) throw DegenerateEdf("edf >= n; GCV undefined");
  const double r = nd - fit.edf;
  return nd * fit.rss / (r * r);
}

double reml_of(const PlsProblem& prob, const PlsFit& fit) {
  const double n = static_cast<double>(prob.n());
  const double q = static_cast<double>(prob.q());
  const double m = static_cast<double>(prob.m());
  if (prob.q() < 1) throw InvalidArgument("REML needs q >= 1");
  if (!(fit.edf < n)) throw DegenerateEdf("edf >= n; REML undefined");
  const double sigma2 = fit.rss / (n - fit.edf);
  const double pen = std::exp(fit.rho) * (prob.penalty().matrix * fit.beta_hat).squaredNorm();
  return 0.5 * prob.log_det_ddt() + 0.5 * q * fit.rho - 0.5 * fit.log_det_c -
         0.5 * (n - m) * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * (n - fit.edf) - pen / (2.0 * sigma2);
}

double pls_objective(const PlsProblem& prob, const Vectord& beta, double rho) {
  if (beta.size() != prob.p()) throw InvalidDimensions("beta length differs from p");
  const double rss = (prob.response() - prob.design() * beta).squaredNorm();
  return rss + std::exp(rho) * (prob.penalty().matrix * beta).squaredNorm();
}

}  // namespace pspline
