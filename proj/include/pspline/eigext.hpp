#pragma once

#include <cstdint>

#include "pspline/band.hpp"
#include "pspline/penalty.hpp"

namespace pspline {

/// E = L⁻¹Dᵀ (p×q), split as a q×q lower-triangular E1 over an m×q E2.
struct TrapezoidFactor {
  Matrixd e;

  Index p() const noexcept { return e.rows(); }
  Index q() const noexcept { return e.cols(); }
  auto e1() const { return e.topRows(q()); }
  auto e2() const { return e.bottomRows(p() - q()); }
};

TrapezoidFactor build_E(const LowerBandMatrixd& l, const PenaltyFactor& d);

struct EigenIteration {
  double value = 0.0;
  int iterations = 0;
  bool singular = false;
};

/// Relative change of the Rayleigh estimate that ends both iterations.
inline constexpr double kEigenTolerance = 1e-6;

/// Block width of the power iteration in max_eigen.
inline constexpr Index kPowerBlock = 4;

/// Largest eigenvalue of EᵀE by block power iteration with Rayleigh–Ritz on
/// v ↦ D L⁻ᵀ L⁻¹ Dᵀ v, never forming E. The block makes nearly equal
/// leading eigenvalues (common with symmetric boundary effects) converge at
/// the rate λ₅/λ₁ instead of λ₂/λ₁.
EigenIteration max_eigen(const LowerBandMatrixd& l, const PenaltyFactor& d, std::uint64_t seed);

/// Smallest eigenvalue of EᵀE by inverse iteration, applying (EᵀE)⁻¹ through
/// the Woodbury identity on E1ᵀE1 + E2ᵀE2. Clamped to λ₁·ε (and flagged
/// singular) when the estimate is not credible.
EigenIteration min_eigen(const TrapezoidFactor& tf, double lambda_max, std::uint64_t seed);

/// ‖E‖²_F / q.
double mean_eigen(const TrapezoidFactor& tf);

/// Full spectrum of EᵀE, descending. O(q³).
Vectord all_eigenvalues(const TrapezoidFactor& tf);

/// Applies (EᵀE)⁻¹ to vectors via the Woodbury identity. Exposed for testing.
class WoodburyInverse {
 public:
  explicit WoodburyInverse(const TrapezoidFactor& tf);
  Vectord apply(const Vectord& v) const;

 private:
  const TrapezoidFactor& tf_;
  Matrixd f_;
  Eigen::LLT<Matrixd> g_;
};

struct EigenSummary {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double lambda_mean = 0.0;
  Index q = 0;
  bool singular = false;
  int max_iterations = 0;
  int min_iterations = 0;
};

/// λ₁, λ_q and λ̄ for a problem with Cholesky factor L of BᵀWB.
EigenSummary eigen_summary(const LowerBandMatrixd& l, const PenaltyFactor& d, std::uint64_t seed);

}  // namespace pspline
