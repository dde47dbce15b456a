#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "goldens.hpp"
#include "oracles.hpp"
#include "pspline/penalty.hpp"

using namespace pspline;

namespace {

using golden::printed;
using golden::uneven_cubic;
using golden::unit_interval_cubic;

double max_abs(const Matrixd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("standard_diff") {
  const Matrixd d2 = standard_diff(6, 2).matrix.to_dense();
  CHECK(d2 == printed({{1, -2, 1}, {1, -2, 1}, {1, -2, 1}, {1, -2, 1}}, 6));
  const Matrixd d1 = standard_diff(4, 1).matrix.to_dense();
  CHECK(d1 == printed({{1, -1}, {1, -1}, {1, -1}}, 4));
  const Matrixd d3 = standard_diff(5, 3).matrix.to_dense();
  CHECK(d3.row(0) == (Eigen::RowVectorXd(5) << 1, -3, 3, -1, 0).finished());

  // annihilates polynomials of degree < m
  for (int m = 1; m <= 4; ++m) {
    const PenaltyFactor d = standard_diff(12, m);
    for (int deg = 0; deg < m; ++deg) {
      Vectord v(12);
      for (Index i = 0; i < 12; ++i) v(i) = std::pow(static_cast<double>(i), deg);
      CHECK(max_abs(d.matrix.to_dense() * v) < 1e-9);
    }
  }
  CHECK_THROWS_AS(standard_diff(4, 0), InvalidOrder);
  CHECK_THROWS_AS(standard_diff(4, 4), InvalidOrder);
}

TEST_CASE("general_diff reduces to standard_diff on unit knots") {
  for (int d : {2, 3, 4, 5}) {
    const KnotVector kv = equidistant_knots(15, d);
    for (int m = 1; m < d; ++m)
      CHECK(general_diff(kv, m).matrix.to_dense() == standard_diff(15, m).matrix.to_dense());
  }
}

TEST_CASE("general_diff: printed uneven-knot matrix") {
  const Matrixd got = general_diff(uneven_cubic(), 2).matrix.to_dense();
  const Matrixd want = golden::gps_uneven();
  CHECK(max_abs(got - want) < 5e-3);
}

TEST_CASE("general_diff: composition and null space") {
  const KnotVector kv = random_knots(20, 4, 31);
  // a polynomial of degree < m is in the null space: feed Greville-style
  // coefficients of x (degree 1) for m=2
  Vectord greville(kv.num_basis());
  for (Index j = 0; j < kv.num_basis(); ++j) greville(j) = (kv[j + 1] + kv[j + 2] + kv[j + 3]) / 3.0;
  CHECK(max_abs(general_diff(kv, 2).matrix.to_dense() * greville) < 1e-9 * max_abs(greville));
  CHECK(max_abs(general_diff(kv, 1).matrix.to_dense() * Vectord::Ones(kv.num_basis())) < 1e-12);

  // D_2 equals one level of the recursion applied on top of D_1
  const Matrixd d1 = general_diff(kv, 1).matrix.to_dense();
  const Matrixd d2 = general_diff(kv, 2).matrix.to_dense();
  const KnotVector lower = kv.derivative_knots(1);
  Vectord lt = lower.knots();
  Matrixd step = Matrixd::Zero(d1.rows() - 1, d1.rows());
  for (Index j = 0; j < step.rows(); ++j) {
    const double s = (lower.order() - 1) / (lt(j + lower.order()) - lt(j + 1));
    step(j, j) = -s;
    step(j, j + 1) = s;
  }
  // sign convention flips once per level
  CHECK(max_abs(d2 + step * d1) < 1e-9 * max_abs(d2));
  CHECK(d2.rows() == kv.num_basis() - 2);
}

TEST_CASE("derivative_gram: linear hat functions by hand") {
  Vectord t(5);
  t << 0, 0, 1, 2, 2;
  const Matrixd s = derivative_gram(KnotVector(t, 2), 1).to_dense();
  Matrixd want(3, 3);
  want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(max_abs(s - want) < 1e-14);
}

TEST_CASE("derivative_gram: symmetric PSD with nullity m") {
  for (std::uint64_t seed : {3u, 8u}) {
    const KnotVector kv = random_knots(14, 4, seed);
    for (int m = 1; m <= 3; ++m) {
      const Matrixd s = derivative_gram(kv, m).to_dense();
      CHECK(max_abs(s - s.transpose()) < 1e-12 * max_abs(s));
      const Vectord ev = oracle::sym_eigs_desc(s);
      const double tol = 1e-10 * ev(0);
      Index zeros = 0;
      for (Index i = 0; i < ev.size(); ++i) {
        CHECK(ev(i) > -tol);
        if (std::abs(ev(i)) <= tol) ++zeros;
      }
      CHECK(zeros == m);
    }
  }
}

TEST_CASE("derivative_gram agrees with a dense high-order quadrature") {
  const KnotVector kv = random_knots(10, 4, 12);
  const Matrixd s = derivative_gram(kv, 2).to_dense();
  const GaussLegendreRule rule = gauss_legendre(12);
  Matrixd ref = Matrixd::Zero(10, 10);
  for (Index i = 3; i < 10; ++i) {
    const double a = kv[i], b = kv[i + 1];
    if (!(a < b)) continue;
    for (Index r = 0; r < 12; ++r) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes(r);
      const BasisRow row = eval_row_derivative(kv, x, 2);
      Vectord full = Vectord::Zero(10);
      full.segment(row.first, 4) = row.values;
      ref += 0.5 * (b - a) * rule.weights(r) * full * full.transpose();
    }
  }
  CHECK(max_abs(s - ref) < 1e-11 * max_abs(ref));
}

TEST_CASE("derivative_factor: DᵀD equals the Gram and the shape is trapezoidal") {
  for (std::uint64_t seed : {1u, 4u, 9u}) {
    const KnotVector kv = random_knots(30, 4, seed);
    for (int m = 1; m <= 3; ++m) {
      const PenaltyFactor f = derivative_factor(kv, m);
      CHECK(f.rows() == 30 - m);
      CHECK(f.cols() == 30);
      const Matrixd d = f.matrix.to_dense();
      const Matrixd s = derivative_gram(kv, m).to_dense();
      CHECK(max_abs(d.transpose() * d - s) < 1e-10 * max_abs(s));
      for (Index i = 0; i < d.rows(); ++i) {
        CHECK(d(i, i) > 0.0);
        for (Index j = 0; j < i; ++j) CHECK(d(i, j) == 0.0);
      }
    }
  }
  const KnotVector kv = equidistant_knots(8, 4);
  const PenaltyFactor f = derivative_factor(kv, 2);
  CHECK(max_abs(f.gram().to_dense() - derivative_gram(kv, 2).to_dense()) < 1e-12);
}

TEST_CASE("derivative_factor: printed uneven-knot matrix") {
  const Matrixd got = derivative_factor(uneven_cubic(), 2).matrix.to_dense();
  const Matrixd want = golden::os_uneven();
  CHECK(max_abs(got - want) < 5e-3);
}

TEST_CASE("derivative_factor: printed equidistant matrix after scale alignment") {
  const KnotVector kv = unit_interval_cubic();
  const Matrixd gps = general_diff(kv, 2).matrix.to_dense();
  // the printed difference matrix is (1,-2,1); the same ratio maps the factor
  const double scale = 1.0 / gps(0, 0);
  const Matrixd got = scale * derivative_factor(kv, 2).matrix.to_dense();
  const Matrixd want = golden::os_equidistant();
  CHECK(max_abs(scale * gps - golden::sps()) < 1e-12);
  CHECK(max_abs(got - want) < 5e-3);
}

TEST_CASE("first-order factor composed with the hat-function Gram") {
  // m = 1 on linear splines: f' is piecewise constant with value Δβ/h, so the
  // factor is diag(1/sqrt(h)) times the first difference.
  Vectord t(7);
  t << 0, 0, 0.5, 1.5, 2, 4, 4;
  const KnotVector kv(t, 2);
  const Matrixd d = derivative_factor(kv, 1).matrix.to_dense();
  const Matrixd s = derivative_gram(kv, 1).to_dense();
  CHECK(max_abs(d.transpose() * d - s) < 1e-12);
  for (Index i = 0; i < d.rows(); ++i) {
    const double h = t(i + 2) - t(i + 1);
    CHECK(d(i, i) == doctest::Approx(1.0 / std::sqrt(h)));
    CHECK(d(i, i + 1) == doctest::Approx(-1.0 / std::sqrt(h)));
  }
}

TEST_CASE("derivative_factor rejects invalid orders") {
  const KnotVector kv = equidistant_knots(8, 4);
  CHECK_THROWS_AS(derivative_factor(kv, 0), InvalidOrder);
  CHECK_THROWS_AS(derivative_factor(kv, 4), InvalidOrder);
  CHECK_THROWS_AS(general_diff(kv, 4), InvalidOrder);
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    const GaussLegendreRule r = gauss_legendre(n);
    CHECK(r.weights.sum() == doctest::Approx(2.0));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double got = 0.0;
      for (Index i = 0; i < n; ++i) got += r.weights(i) * std::pow(r.nodes(i), k);
      const double want = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
      CHECK(std::abs(got - want) < 1e-13);
    }
  }
}
