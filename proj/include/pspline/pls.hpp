#pragma once

#include <optional>
#include <span>

#include "pspline/band.hpp"
#include "pspline/basis.hpp"
#include "pspline/penalty.hpp"

namespace pspline {

/// Penalized least squares ‖y − Bβ‖² + e^ρ‖Dβ‖² with weights absorbed into
/// B and y. Everything that does not depend on ρ is computed once here.
class PlsProblem {
 public:
  PlsProblem(const DesignMatrix& b, std::span<const double> y, std::optional<std::span<const double>> weights,
             PenaltyFactor penalty);

  Index n() const noexcept { return b_.rows(); }
  Index p() const noexcept { return b_.cols; }
  Index q() const noexcept { return penalty_.rows(); }
  int m() const noexcept { return penalty_.order; }

  const DesignMatrix& design() const noexcept { return b_; }
  const Vectord& response() const noexcept { return y_; }
  const PenaltyFactor& penalty() const noexcept { return penalty_; }
  const BandMatrixd& btb() const noexcept { return btb_; }
  const BandMatrixd& penalty_gram() const noexcept { return s_; }
  const Vectord& bty() const noexcept { return bty_; }
  /// L with LLᵀ = BᵀWB.
  const LowerBandMatrixd& factor() const noexcept { return l_; }
  double log_det_ddt() const noexcept { return log_det_ddt_; }

 private:
  DesignMatrix b_;
  Vectord y_;
  PenaltyFactor penalty_;
  BandMatrixd btb_;
  BandMatrixd s_;
  Vectord bty_;
  LowerBandMatrixd l_;
  double log_det_ddt_ = 0.0;
};

struct PlsFit {
  double rho = 0.0;
  Vectord beta_hat;
  Vectord y_hat;
  double edf = 0.0;
  double rss = 0.0;
  double gcv = 0.0;
  double reml = 0.0;
  double sigma2_hat = 0.0;
  /// log|BᵀB + e^ρDᵀD|, kept for the REML evaluation.
  double log_det_c = 0.0;
};

/// Solves at one ρ. Throws NumericallyUnsolvable if C is not numerically
/// positive definite.
PlsFit solve_at(const PlsProblem& prob, double rho);

/// ‖K⁻¹L‖²_F, forward-solving one column of L at a time.
double edf_from_factors(const LowerBandMatrixd& k, const LowerBandMatrixd& l);

/// n·rss/(n − edf)².
double gcv_of(const PlsFit& fit, Index n);

/// Restricted log-likelihood with σ² replaced by rss/(n − edf).
double reml_of(const PlsProblem& prob, const PlsFit& fit);

double pls_objective(const PlsProblem& prob, const Vectord& beta, double rho);

}  // namespace pspline
