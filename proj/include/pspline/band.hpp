#pragma once

// Banded storage and the kernels that operate on it: Cholesky, triangular
// band solves, Gram products. Everything here is templated on the scalar type
// and header-only; the rest of the library instantiates it with double.
//
// Storage layout (shared by every kernel):
//   BandMatrix       entry (i, j) lives at data(ku + i - j, j), i.e. one
//                    column of `data` per matrix column, diagonals stacked
//                    from the highest super-diagonal down to the lowest
//                    sub-diagonal (LAPACK "GB" layout).
//   LowerBandMatrix  entry (i, j), j <= i <= j + bw, lives at data(i - j, j).
//   RowBandMatrix    row i holds `width` consecutive entries starting at
//                    column first(i) (a B-spline design matrix).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pspline/errors.hpp"

namespace pspline {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// General rectangular band matrix with `kl` sub- and `ku` super-diagonals.
/// Reading outside the band yields exactly zero.
template <typename Scalar>
class BandMatrix {
 public:
  BandMatrix() = default;

  BandMatrix(Index rows, Index cols, Index lower, Index upper)
      : rows_(rows),
        cols_(cols),
        kl_(std::clamp<Index>(lower, 0, std::max<Index>(rows - 1, 0))),
        ku_(std::clamp<Index>(upper, 0, std::max<Index>(cols - 1, 0))),
        data_(Matrix<Scalar>::Zero(kl_ + ku_ + 1, cols)) {
    if (rows < 1 || cols < 1) throw InvalidDimensions("band matrix must be at least 1x1");
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index lower_bandwidth() const noexcept { return kl_; }
  Index upper_bandwidth() const noexcept { return ku_; }

  bool in_band(Index i, Index j) const noexcept {
    return i >= 0 && j >= 0 && i < rows_ && j < cols_ && j - i <= ku_ && i - j <= kl_;
  }

  Scalar operator()(Index i, Index j) const noexcept {
    return in_band(i, j) ? data_(ku_ + i - j, j) : Scalar(0);
  }

  Scalar& coeffRef(Index i, Index j) {
    eigen_assert(in_band(i, j));
    return data_(ku_ + i - j, j);
  }

  /// First and one-past-last row holding a stored entry of column j.
  Index col_begin(Index j) const noexcept { return std::max<Index>(0, j - ku_); }
  Index col_end(Index j) const noexcept { return std::min<Index>(rows_, j + kl_ + 1); }
  Index row_begin(Index i) const noexcept { return std::max<Index>(0, i - kl_); }
  Index row_end(Index i) const noexcept { return std::min<Index>(cols_, i + ku_ + 1); }

  const Matrix<Scalar>& packed() const noexcept { return data_; }

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(rows_, cols_);
    for (Index j = 0; j < cols_; ++j)
      for (Index i = col_begin(j); i < col_end(j); ++i) out(i, j) = (*this)(i, j);
    return out;
  }

  template <typename Derived>
  static BandMatrix from_dense(const Eigen::MatrixBase<Derived>& a, Index lower, Index upper) {
    BandMatrix out(a.rows(), a.cols(), lower, upper);
    for (Index j = 0; j < out.cols_; ++j)
      for (Index i = out.col_begin(j); i < out.col_end(j); ++i) out.coeffRef(i, j) = a(i, j);
    return out;
  }

  static BandMatrix identity(Index n) {
    BandMatrix out(n, n, 0, 0);
    out.data_.setOnes();
    return out;
  }

  template <typename Derived>
  Vector<Scalar> operator*(const Eigen::MatrixBase<Derived>& x) const {
    eigen_assert(x.size() == cols_);
    Vector<Scalar> y = Vector<Scalar>::Zero(rows_);
    for (Index j = 0; j < cols_; ++j) {
      const Scalar xj = x(j);
      if (xj == Scalar(0)) continue;
      for (Index i = col_begin(j); i < col_end(j); ++i) y(i) += data_(ku_ + i - j, j) * xj;
    }
    return y;
  }

  /// Aᵀx without forming the transpose.
  template <typename Derived>
  Vector<Scalar> transpose_times(const Eigen::MatrixBase<Derived>& x) const {
    eigen_assert(x.size() == rows_);
    Vector<Scalar> y(cols_);
    for (Index j = 0; j < cols_; ++j) {
      Scalar s(0);
      for (Index i = col_begin(j); i < col_end(j); ++i) s += data_(ku_ + i - j, j) * x(i);
      y(j) = s;
    }
    return y;
  }

  BandMatrix& operator*=(Scalar c) {
    data_ *= c;
    return *this;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index kl_ = 0;
  Index ku_ = 0;
  Matrix<Scalar> data_;
};

/// Square lower-triangular band matrix: a Cholesky factor.
template <typename Scalar>
class LowerBandMatrix {
 public:
  LowerBandMatrix() = default;

  LowerBandMatrix(Index dim, Index bandwidth)
      : dim_(dim),
        bw_(std::clamp<Index>(bandwidth, 0, std::max<Index>(dim - 1, 0))),
        data_(Matrix<Scalar>::Zero(bw_ + 1, dim)) {
    if (dim < 1) throw InvalidDimensions("lower band matrix must be at least 1x1");
  }

  Index dim() const noexcept { return dim_; }
  Index rows() const noexcept { return dim_; }
  Index cols() const noexcept { return dim_; }
  Index bandwidth() const noexcept { return bw_; }

  bool in_band(Index i, Index j) const noexcept {
    return j >= 0 && i < dim_ && i >= j && i - j <= bw_;
  }

  Scalar operator()(Index i, Index j) const noexcept {
    return in_band(i, j) ? data_(i - j, j) : Scalar(0);
  }

  Scalar& coeffRef(Index i, Index j) {
    eigen_assert(in_band(i, j));
    return data_(i - j, j);
  }

  /// Unchecked read; caller guarantees (i, j) is inside the band.
  Scalar at(Index i, Index j) const noexcept { return data_(i - j, j); }

  auto diagonal() const { return data_.row(0).transpose(); }

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(dim_, dim_);
    for (Index j = 0; j < dim_; ++j)
      for (Index i = j; i < std::min(dim_, j + bw_ + 1); ++i) out(i, j) = data_(i - j, j);
    return out;
  }

  static LowerBandMatrix identity(Index n) {
    LowerBandMatrix out(n, 0);
    out.data_.setOnes();
    return out;
  }

  template <typename Derived>
  static LowerBandMatrix from_dense(const Eigen::MatrixBase<Derived>& a, Index bandwidth) {
    LowerBandMatrix out(a.rows(), bandwidth);
    for (Index j = 0; j < out.dim_; ++j)
      for (Index i = j; i < std::min(out.dim_, j + out.bw_ + 1); ++i) out.data_(i - j, j) = a(i, j);
    return out;
  }

 private:
  Index dim_ = 0;
  Index bw_ = 0;
  Matrix<Scalar> data_;
};

/// Matrix whose row i has `width` consecutive stored entries starting at
/// column first[i]. B-spline design matrices have this shape.
template <typename Scalar>
struct RowBandMatrix {
  Index cols = 0;
  std::vector<Index> first;
  Matrix<Scalar> values;  // rows x width

  Index rows() const noexcept { return values.rows(); }
  Index width() const noexcept { return values.cols(); }

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(rows(), cols);
    for (Index i = 0; i < rows(); ++i)
      for (Index k = 0; k < width(); ++k)
        if (first[i] + k < cols) out(i, first[i] + k) += values(i, k);
    return out;
  }

  template <typename Derived>
  Vector<Scalar> operator*(const Eigen::MatrixBase<Derived>& beta) const {
    Vector<Scalar> y(rows());
    for (Index i = 0; i < rows(); ++i) {
      Scalar s(0);
      for (Index k = 0; k < width() && first[i] + k < cols; ++k) s += values(i, k) * beta(first[i] + k);
      y(i) = s;
    }
    return y;
  }

  template <typename Derived>
  Vector<Scalar> transpose_times(const Eigen::MatrixBase<Derived>& y) const {
    Vector<Scalar> out = Vector<Scalar>::Zero(cols);
    for (Index i = 0; i < rows(); ++i)
      for (Index k = 0; k < width() && first[i] + k < cols; ++k) out(first[i] + k) += values(i, k) * y(i);
    return out;
  }

  /// Row i scaled by s[i]; used to absorb √w into the design.
  template <typename Derived>
  RowBandMatrix scaled_rows(const Eigen::MatrixBase<Derived>& s) const {
    RowBandMatrix out = *this;
    out.values = s.asDiagonal() * values;
    return out;
  }
};

/// Cholesky factorization A = GGᵀ of a symmetric positive-definite band
/// matrix. Only the lower band of `a` is read. A pivot at or below
/// dim·ε·max|diag(A)| raises NotPositiveDefinite.
template <typename Scalar>
LowerBandMatrix<Scalar> cholesky_band(const BandMatrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw InvalidDimensions("cholesky_band needs a square matrix");
  const Index n = a.rows();
  const Index bw = a.lower_bandwidth();
  LowerBandMatrix<Scalar> g(n, bw);

  Scalar max_diag(0);
  for (Index j = 0; j < n; ++j) max_diag = std::max(max_diag, std::abs(a(j, j)));
  const Scalar threshold = Scalar(n) * std::numeric_limits<Scalar>::epsilon() * max_diag;

  for (Index j = 0; j < n; ++j) {
    const Index k0 = std::max<Index>(0, j - bw);
    Scalar pivot = a(j, j);
    for (Index k = k0; k < j; ++k) pivot -= g.at(j, k) * g.at(j, k);
    if (!(pivot > threshold)) throw NotPositiveDefinite(j);
    const Scalar gjj = std::sqrt(pivot);
    g.coeffRef(j, j) = gjj;
    const Index iend = std::min<Index>(n, j + bw + 1);
    for (Index i = j + 1; i < iend; ++i) {
      Scalar s = a(i, j);
      for (Index k = std::max<Index>(0, i - bw); k < j; ++k) s -= g.at(i, k) * g.at(j, k);
      g.coeffRef(i, j) = s / gjj;
    }
  }
  return g;
}

namespace detail {

template <typename Scalar>
void check_factor_diagonal(const LowerBandMatrix<Scalar>& g) {
  for (Index j = 0; j < g.dim(); ++j)
    if (g(j, j) == Scalar(0)) throw SingularFactor("zero on the diagonal of a triangular factor");
}

}  // namespace detail

/// In-place forward substitution G x = b on the entries [start, dim) of a
/// vector whose leading `start` entries are known to be zero.
template <typename Scalar, typename Derived>
void solve_lower_band_inplace(const LowerBandMatrix<Scalar>& g, Eigen::MatrixBase<Derived>& x,
                              Index start = 0) {
  const Index n = g.dim();
  const Index bw = g.bandwidth();
  for (Index i = start; i < n; ++i) {
    Scalar s = x(i);
    for (Index k = std::max(start, i - bw); k < i; ++k) s -= g.at(i, k) * x(k);
    x(i) = s / g.at(i, i);
  }
}

/// In-place backward substitution Gᵀ x = b.
template <typename Scalar, typename Derived>
void solve_upper_band_inplace(const LowerBandMatrix<Scalar>& g, Eigen::MatrixBase<Derived>& x) {
  const Index n = g.dim();
  const Index bw = g.bandwidth();
  for (Index i = n - 1; i >= 0; --i) {
    Scalar s = x(i);
    const Index kend = std::min<Index>(n, i + bw + 1);
    for (Index k = i + 1; k < kend; ++k) s -= g.at(k, i) * x(k);
    x(i) = s / g.at(i, i);
  }
}

/// Solves G X = rhs for a vector or a matrix right-hand side.
template <typename Scalar, typename Derived>
Matrix<Scalar> solve_lower_band(const LowerBandMatrix<Scalar>& g, const Eigen::MatrixBase<Derived>& rhs) {
  if (rhs.rows() != g.dim()) throw InvalidDimensions("solve_lower_band: dimension mismatch");
  detail::check_factor_diagonal(g);
  Matrix<Scalar> x = rhs;
  for (Index c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    solve_lower_band_inplace(g, col);
  }
  return x;
}

/// Solves Gᵀ X = rhs, G lower band; the transpose is never formed.
template <typename Scalar, typename Derived>
Matrix<Scalar> solve_upper_band(const LowerBandMatrix<Scalar>& g, const Eigen::MatrixBase<Derived>& rhs) {
  if (rhs.rows() != g.dim()) throw InvalidDimensions("solve_upper_band: dimension mismatch");
  detail::check_factor_diagonal(g);
  Matrix<Scalar> x = rhs;
  for (Index c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    solve_upper_band_inplace(g, col);
  }
  return x;
}

/// Sum of squared entries.
template <typename Derived>
typename Derived::Scalar frobenius_sq(const Eigen::MatrixBase<Derived>& x) {
  return x.squaredNorm();
}

/// All eigenvalues of a symmetric matrix in non-increasing order.
template <typename Derived>
Vector<typename Derived::Scalar> dense_sym_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw InvalidDimensions("dense_sym_eigenvalues needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

/// BᵀWB for a row-banded B; W = I when weights are absent. The result is
/// symmetric with bandwidth width-1 (both triangles stored).
template <typename Scalar>
BandMatrix<Scalar> btb(const RowBandMatrix<Scalar>& b, std::type_identity_t<std::optional<std::span<const Scalar>>> weights = {}) {
  if (weights && static_cast<Index>(weights->size()) != b.rows())
    throw InvalidDimensions("btb: weight count differs from row count");
  const Index w = b.width();
  BandMatrix<Scalar> out(b.cols, b.cols, w - 1, w - 1);
  for (Index i = 0; i < b.rows(); ++i) {
    const Scalar wi = weights ? (*weights)[i] : Scalar(1);
    if (wi < Scalar(0)) throw InvalidArgument("btb: negative weight");
    if (wi == Scalar(0)) continue;
    const Index f = b.first[i];
    for (Index k = 0; k < w && f + k < b.cols; ++k) {
      const Scalar bk = wi * b.values(i, k);
      for (Index l = 0; l <= k; ++l) {
        const Scalar v = bk * b.values(i, l);
        out.coeffRef(f + k, f + l) += v;
        if (k != l) out.coeffRef(f + l, f + k) += v;
      }
    }
  }
  return out;
}

/// DᵀD for a band matrix D; symmetric, bandwidth max(kl, ku) of D.
template <typename Scalar>
BandMatrix<Scalar> gram_band(const BandMatrix<Scalar>& d) {
  const Index bw = d.lower_bandwidth() + d.upper_bandwidth();
  BandMatrix<Scalar> out(d.cols(), d.cols(), bw, bw);
  for (Index r = 0; r < d.rows(); ++r) {
    const Index c0 = d.row_begin(r);
    const Index c1 = d.row_end(r);
    for (Index k = c0; k < c1; ++k) {
      const Scalar dk = d(r, k);
      if (dk == Scalar(0)) continue;
      for (Index l = c0; l <= k; ++l) {
        const Scalar v = dk * d(r, l);
        out.coeffRef(k, l) += v;
        if (k != l) out.coeffRef(l, k) += v;
      }
    }
  }
  return out;
}

/// a + c·b for symmetric band matrices of equal dimension.
template <typename Scalar>
BandMatrix<Scalar> add_scaled(const BandMatrix<Scalar>& a, Scalar c, const BandMatrix<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidDimensions("add_scaled: shape mismatch");
  const Index kl = std::max(a.lower_bandwidth(), b.lower_bandwidth());
  const Index ku = std::max(a.upper_bandwidth(), b.upper_bandwidth());
  BandMatrix<Scalar> out(a.rows(), a.cols(), kl, ku);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = out.col_begin(j); i < out.col_end(j); ++i) out.coeffRef(i, j) = a(i, j) + c * b(i, j);
  return out;
}

/// 2·Σ log G_jj, the log-determinant of GGᵀ.
template <typename Scalar>
Scalar log_det_from_factor(const LowerBandMatrix<Scalar>& g) {
  return Scalar(2) * g.diagonal().array().log().sum();
}

using BandMatrixd = BandMatrix<double>;
using LowerBandMatrixd = LowerBandMatrix<double>;
using RowBandMatrixd = RowBandMatrix<double>;
using Vectord = Vector<double>;
using Matrixd = Matrix<double>;

}  // namespace pspline
