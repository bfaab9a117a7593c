#pragma once

// Dense kernels shared by every module. Everything is a thin, scalar-generic
// layer over Eigen; the rest of the library instantiates it with double.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "graphkeeper/errors.hpp"
#include "graphkeeper/rng.hpp"

namespace gk {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entry");
}

template <typename Derived>
void require_shape(const Eigen::MatrixBase<Derived>& m, Index rows, Index cols,
                   const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

template <typename Scalar>
struct SvdResult {
  DenseMatrix<Scalar> U;  // n x k, orthonormal columns
  DenseVector<Scalar> S;  // k values, nonincreasing
  DenseMatrix<Scalar> V;  // d x k, orthonormal columns
};

// Top-k singular triplets. Each column of V is sign-normalised so that its
// largest-magnitude entry (lowest index on ties) is nonnegative; the matching
// U column is flipped with it.
template <typename Derived>
SvdResult<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& m,
                                                  Index k) {
  using Scalar = typename Derived::Scalar;
  if (k < 1 || k > std::min(m.rows(), m.cols())) {
    throw BoundsError("truncated_svd: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(m.rows(), m.cols())) + "]");
  }
  require_finite(m, "truncated_svd");

  const DenseMatrix<Scalar> a = m;
  Eigen::BDCSVD<DenseMatrix<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult<Scalar> out;
  out.U = svd.matrixU().leftCols(k);
  out.S = svd.singularValues().head(k);
  out.V = svd.matrixV().leftCols(k);
  for (Index j = 0; j < k; ++j) {
    Index arg = 0;
    Scalar best = Scalar(-1);
    for (Index i = 0; i < out.V.rows(); ++i) {
      const Scalar mag = std::abs(out.V(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (out.V(arg, j) < Scalar(0)) {
      out.V.col(j) = -out.V.col(j);
      out.U.col(j) = -out.U.col(j);
    }
  }
  return out;
}

// Solves A Z = B for symmetric positive definite A via Cholesky.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> spd_solve(const Eigen::MatrixBase<DerivedA>& a,
                                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != a.cols()) throw ValidationError("spd_solve: A is not square");
  if (b.rows() != a.rows()) throw ValidationError("spd_solve: row count of B does not match A");
  require_finite(a, "spd_solve(A)");
  require_finite(b, "spd_solve(B)");
  const Scalar scale = std::max(Scalar(1), a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
    throw NumericalError("spd_solve: A is not symmetric");
  }
  Eigen::LLT<DenseMatrix<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("spd_solve: Cholesky factorization failed (A not positive definite)");
  }
  return llt.solve(b);
}

// (X^T X + lambda I)^{-1} X^T Y.
template <typename DerivedX, typename DerivedY>
DenseMatrix<typename DerivedX::Scalar> ridge_solve_batch(const Eigen::MatrixBase<DerivedX>& x,
                                                         const Eigen::MatrixBase<DerivedY>& y,
                                                         typename DerivedX::Scalar lambda) {
  using Scalar = typename DerivedX::Scalar;
  if (!(lambda > Scalar(0))) throw ValidationError("ridge_solve_batch: lambda must be positive");
  if (x.rows() < 1) throw ValidationError("ridge_solve_batch: no rows");
  if (x.rows() != y.rows()) throw ValidationError("ridge_solve_batch: X and Y row counts differ");
  DenseMatrix<Scalar> gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  return spd_solve(gram, x.transpose() * y);
}

// Row-wise softmax with per-row max subtraction.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_finite(m, "softmax_rows");
  DenseMatrix<Scalar> out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const Scalar shift = m.row(i).maxCoeff();
    out.row(i) = (m.row(i).array() - shift).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

// Index of the largest entry per row, lowest index on ties.
template <typename Derived>
std::vector<Index> argmax_rows(const Eigen::MatrixBase<Derived>& m) {
  std::vector<Index> out(static_cast<std::size_t>(m.rows()), 0);
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// Seeded generators; entries are drawn in row-major order.
template <typename Scalar = double>
DenseMatrix<Scalar> gaussian_matrix(Index rows, Index cols, Rng& rng, Scalar stddev = 1) {
  DenseMatrix<Scalar> out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = static_cast<Scalar>(rng.normal()) * stddev;
  return out;
}

template <typename Scalar = double>
DenseMatrix<Scalar> uniform_matrix(Index rows, Index cols, Rng& rng, Scalar lo, Scalar hi) {
  DenseMatrix<Scalar> out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = static_cast<Scalar>(rng.uniform(lo, hi));
  return out;
}

}  // namespace gk
