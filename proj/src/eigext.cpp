#include "pspline/eigext.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pspline {

namespace {

Vectord random_start(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vectord v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

int iteration_cap(Index q) { return static_cast<int>(std::max<Index>(10 * q, 100)); }

}  // namespace

TrapezoidFactor build_E(const LowerBandMatrixd& l, const PenaltyFactor& d) {
  const Index p = d.cols();
  const Index q = d.rows();
  if (l.dim() != p) throw InvalidDimensions("build_E: L and D disagree on p");
  detail::check_factor_diagonal(l);
  TrapezoidFactor tf{Matrixd::Zero(p, q)};
  for (Index j = 0; j < q; ++j) {
    auto col = tf.e.col(j);
    const Index c0 = d.matrix.row_begin(j);
    for (Index c = c0; c < d.matrix.row_end(j); ++c) col(c) = d.matrix(j, c);
    solve_lower_band_inplace(l, col, c0);
  }
  return tf;
}

EigenIteration max_eigen(const LowerBandMatrixd& l, const PenaltyFactor& d, std::uint64_t seed) {
  const Index q = d.rows();
  if (l.dim() != d.cols()) throw InvalidDimensions("max_eigen: L and D disagree on p");
  detail::check_factor_diagonal(l);
  const int cap = iteration_cap(q);
  const Index block = std::min<Index>(q, kPowerBlock);

  // A·v = D L⁻ᵀ L⁻¹ Dᵀ v for each column, O(p) per column.
  auto apply = [&](const Matrixd& v) {
    Matrixd w(q, v.cols());
    for (Index c = 0; c < v.cols(); ++c) {
      Vectord b = d.matrix.transpose_times(v.col(c));
      solve_lower_band_inplace(l, b);
      solve_upper_band_inplace(l, b);
      w.col(c) = d.matrix * b;
    }
    return w;
  };
  auto orthonormal = [](const Matrixd& w) -> Matrixd {
    Eigen::HouseholderQR<Matrixd> qr(w);
    return qr.householderQ() * Matrixd::Identity(w.rows(), w.cols());
  };

  for (int attempt = 0; attempt < 2; ++attempt) {
    Matrixd v(q, block);
    for (Index c = 0; c < block; ++c)
      v.col(c) = random_start(q, seed + static_cast<std::uint64_t>(attempt) * 1000003u + static_cast<std::uint64_t>(c));
    v = orthonormal(v);
    double lambda = 0.0;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cap; ++it) {
      const Matrixd w = apply(v);
      // Rayleigh–Ritz on the block; the top Ritz value bounds λ₁ from below.
      Eigen::SelfAdjointEigenSolver<Matrixd> ritz(v.transpose() * w, Eigen::EigenvaluesOnly);
      const double next = ritz.eigenvalues()(block - 1);
      if (!(next > std::numeric_limits<double>::min())) break;  // start block orthogonal to the top eigenspace
      const double step = std::abs(next - lambda);
      if (step < next * kEigenTolerance) {
        // a small step alone does not bound the error when convergence is
        // slow; also require the estimated geometric tail to be small
        const double rate = step / prev_step;
        if (rate < 1.0 && step * rate / (1.0 - rate) < 0.1 * next * kEigenTolerance) return {next, it, false};
      }
      prev_step = step;
      lambda = next;
      v = orthonormal(w);
    }
    if (lambda > 0.0) throw ConvergenceFailure("max_eigen: no convergence in " + std::to_string(cap) + " steps");
  }
  throw ConvergenceFailure("max_eigen: iteration stagnated at zero");
}

WoodburyInverse::WoodburyInverse(const TrapezoidFactor& tf) : tf_(tf) {
  const auto e1 = tf.e1().triangularView<Eigen::Lower>();
  for (Index i = 0; i < tf.q(); ++i)
    if (tf.e(i, i) == 0.0) throw SingularFactor("E1 has a zero diagonal entry");
  const Matrixd r = e1.transpose().solve(tf.e2().transpose());
  f_ = e1.solve(r);
  const Matrixd h = Matrixd::Identity(r.cols(), r.cols()) + r.transpose() * r;
  g_.compute(h);
  if (g_.info() != Eigen::Success) throw FactorizationFailure("I + RᵀR is not positive definite");
}

Vectord WoodburyInverse::apply(const Vectord& v) const {
  const auto e1 = tf_.e1().triangularView<Eigen::Lower>();
  Vectord a = e1.transpose().solve(v);
  a = e1.solve(a);
  if (f_.cols() == 0) return a;
  const Vectord c = f_.transpose() * v;
  return a - f_ * g_.solve(c);
}

EigenIteration min_eigen(const TrapezoidFactor& tf, double lambda_max, std::uint64_t seed) {
  if (!(lambda_max > 0.0)) throw InvalidArgument("min_eigen needs lambda_max > 0");
  const double floor = lambda_max * std::numeric_limits<double>::epsilon();
  const WoodburyInverse inv(tf);
  const int cap = iteration_cap(tf.q());
  Vectord u = random_start(tf.q(), seed);
  double lambda = 0.0;
  for (int it = 1; it <= cap; ++it) {
    const Vectord v = u / u.norm();
    u = inv.apply(v);
    const double next = v.dot(u);
    if (next < 0.0) return {floor, it, true};
    if (std::abs(next - lambda) < lambda * kEigenTolerance) {
      const double value = 1.0 / next;
      if (value < floor) return {floor, it, true};
      return {value, it, false};
    }
    lambda = next;
  }
  throw ConvergenceFailure("min_eigen: no convergence in " + std::to_string(cap) + " steps");
}

double mean_eigen(const TrapezoidFactor& tf) {
  if (tf.q() < 1) throw InvalidDimensions("mean_eigen needs q >= 1");
  return frobenius_sq(tf.e) / static_cast<double>(tf.q());
}

Vectord all_eigenvalues(const TrapezoidFactor& tf) {
  if (tf.q() < 1) throw InvalidDimensions("all_eigenvalues needs q >= 1");
  // only the lower triangle is formed and read
  Matrixd a = Matrixd::Zero(tf.q(), tf.q());
  a.selfadjointView<Eigen::Lower>().rankUpdate(tf.e.transpose());
  return dense_sym_eigenvalues(a);
}

EigenSummary eigen_summary(const LowerBandMatrixd& l, const PenaltyFactor& d, std::uint64_t seed) {
  const TrapezoidFactor tf = build_E(l, d);
  const EigenIteration top = max_eigen(l, d, seed);
  const EigenIteration bottom = min_eigen(tf, top.value, seed + 1);
  EigenSummary s;
  s.lambda_max = top.value;
  s.lambda_min = bottom.value;
  s.lambda_mean = mean_eigen(tf);
  s.q = tf.q();
  s.singular = bottom.singular;
  s.max_iterations = top.iterations;
  s.min_iterations = bottom.iterations;
  return s;
}

}  // namespace pspline
