#pragma once

// Random smoothing instances for tests, built from the public API.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pspline/basis.hpp"
#include "pspline/penalty.hpp"

namespace fixture {

using namespace pspline;

struct Instance {
  KnotVector kv;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;  // empty when unweighted
  PenaltyFactor d;
  DesignMatrix b;

  std::optional<std::span<const double>> weights() const {
    if (w.empty()) return std::nullopt;
    return std::span<const double>(w);
  }
};

inline Instance make_instance(Index p, int d, int m, bool derivative, bool equidistant, bool weighted,
                              std::uint64_t seed, Index per_interval = 10) {
  KnotVector kv = equidistant ? equidistant_knots(p, d) : random_knots(p, d, seed);
  std::vector<double> x = xs_between_knots(kv, per_interval, seed + 7);
  std::mt19937_64 rng(seed + 13);
  std::normal_distribution<double> noise(0.0, 0.2);
  std::gamma_distribution<double> g3(3.0, 1.0);
  const double lo = kv.domain_lo(), hi = kv.domain_hi();
  std::vector<double> y(x.size()), w;
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = std::sin(2.0 * std::numbers::pi * (x[i] - lo) / (hi - lo)) + noise(rng);
  if (weighted) {
    w.resize(x.size());
    for (auto& wi : w) {
      const double a = g3(rng), c = g3(rng);
      wi = a / (a + c);
    }
  }
  PenaltyFactor pen = derivative ? derivative_factor(kv, m) : general_diff(kv, m);
  DesignMatrix b = design_matrix(kv, x);
  return {std::move(kv), std::move(x), std::move(y), std::move(w), std::move(pen), std::move(b)};
}

/// Dense Demmler–Reinsch eigenvalues: spectrum of EᵀE with E = L⁻¹Dᵀ,
/// LLᵀ = BᵀWB, descending.
inline Eigen::VectorXd dense_dr_eigenvalues(const Eigen::MatrixXd& btwb, const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd l = btwb.llt().matrixL();
  const Eigen::MatrixXd e = l.triangularView<Eigen::Lower>().solve(d.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

}  // namespace fixture
