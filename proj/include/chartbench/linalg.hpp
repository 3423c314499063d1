#pragma once

// Dense numerical building blocks shared by every method: pairwise distances,
// symmetric eigendecomposition, ridge-regularized affine least squares and
// rigid Procrustes alignment.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "chartbench/errors.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

/// Tolerance used to accept a matrix as symmetric, relative to its largest entry.
template <typename Scalar>
constexpr Scalar symmetry_tolerance() {
  return std::max(Scalar(1e-12), Scalar(16) * std::numeric_limits<Scalar>::epsilon());
}

/// D2(i, j) = |X.row(i) - X.row(j)|^2. Each unordered pair is computed once, so the
/// result is exactly symmetric with an exactly zero diagonal.
template <typename Derived>
Matrix<typename Derived::Scalar> pairwise_sq_dists(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const Index n = X.rows();
  if (n < 1) throw InvalidArgument("pairwise_sq_dists: need at least one row");
  Matrix<Scalar> D2(n, n);
  for (Index j = 0; j < n; ++j) {
    D2(j, j) = Scalar(0);
    for (Index i = j + 1; i < n; ++i) {
      const Scalar v = (X.row(i) - X.row(j)).squaredNorm();
      D2(i, j) = v;
      D2(j, i) = v;
    }
  }
  return D2;
}

/// Squared distances from every row of A to every row of B (A.rows() x B.rows()).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> cross_sq_dists(const Eigen::MatrixBase<DerivedA>& A,
                                                 const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  if (A.cols() != B.cols()) throw InvalidArgument("cross_sq_dists: column mismatch");
  Matrix<Scalar> D2(A.rows(), B.rows());
  for (Index j = 0; j < B.rows(); ++j)
    for (Index i = 0; i < A.rows(); ++i) D2(i, j) = (A.row(i) - B.row(j)).squaredNorm();
  return D2;
}

/// Flips each column so its entry of largest magnitude is positive (first such
/// entry on ties).
template <typename Derived>
void apply_sign_convention(Eigen::MatrixBase<Derived>& V) {
  for (Index c = 0; c < V.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < V.rows(); ++r)
      if (std::abs(V(r, c)) > std::abs(V(best, c))) best = r;
    if (V(best, c) < 0) V.col(c) = -V.col(c);
  }
}

template <typename Scalar>
struct SymSpectrum {
  Vector<Scalar> values;   // descending
  Matrix<Scalar> vectors;  // column n pairs with values[n]

  Index size() const { return values.size(); }
};

namespace detail {

template <typename Derived>
void check_symmetric(const Eigen::MatrixBase<Derived>& S, const char* who) {
  using Scalar = typename Derived::Scalar;
  if (S.rows() != S.cols()) throw InvalidArgument(std::string(who) + ": matrix is not square");
  const Scalar scale = std::max(Scalar(1), S.cwiseAbs().maxCoeff());
  const Scalar asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= symmetry_tolerance<Scalar>() * scale))
    throw InvalidArgument(std::string(who) + ": matrix is not symmetric (max asymmetry " +
                          std::to_string(static_cast<double>(asym)) + ")");
}

}  // namespace detail

/// Top-k eigenpairs of a symmetric matrix, sorted by algebraic value, descending.
/// Full dense reduction (Householder tridiagonalization + implicit QR), then
/// truncation. Eigenvectors follow apply_sign_convention.
template <typename Derived>
SymSpectrum<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& S, Index k) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(S, "sym_eig");
  const Index n = S.rows();
  if (k < 1 || k > n) throw InvalidArgument("sym_eig: k must lie in [1, N]");

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(S.derived(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver did not converge");

  // Eigen returns ascending order.
  SymSpectrum<Scalar> out;
  out.values = solver.eigenvalues().tail(k).reverse();
  out.vectors = solver.eigenvectors().rightCols(k).rowwise().reverse();
  apply_sign_convention(out.vectors);
  return out;
}

/// All eigenvalues of a symmetric matrix, descending.
template <typename Derived>
Vector<typename Derived::Scalar> sym_eigvals(const Eigen::MatrixBase<Derived>& S) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(S, "sym_eigvals");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(S.derived(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eigvals: eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

/// Affine map Q ~ U * L + 1 * b^T.
template <typename Scalar>
struct AffineFit {
  Matrix<Scalar> L;  // d x m
  Vector<Scalar> b;  // m
  Scalar ridge = 0;

  template <typename Derived>
  Matrix<Scalar> predict(const Eigen::MatrixBase<Derived>& U) const {
    Matrix<Scalar> out = U * L;
    out.rowwise() += b.transpose();
    return out;
  }
};

/// 1e-10 * trace(U^T U) / d, the default readout regularization.
template <typename Derived>
typename Derived::Scalar default_ridge(const Eigen::MatrixBase<Derived>& U) {
  using Scalar = typename Derived::Scalar;
  if (U.cols() == 0) return Scalar(0);
  return Scalar(1e-10) * U.squaredNorm() / static_cast<Scalar>(U.cols());
}

/// Minimizes |Q - (U L + 1 b^T)|_F^2 + ridge |L|_F^2. The bias is never penalized,
/// so it is eliminated by centering; the centered problem is solved through the
/// thin SVD of the centered design with Tikhonov filter factors. At ridge = 0
/// singular values below the usual rank cutoff are dropped, which selects the
/// minimum-norm solution.
template <typename DerivedU, typename DerivedQ>
AffineFit<typename DerivedU::Scalar> lstsq_affine(const Eigen::MatrixBase<DerivedU>& U,
                                                 const Eigen::MatrixBase<DerivedQ>& Q,
                                                 typename DerivedU::Scalar ridge) {
  using Scalar = typename DerivedU::Scalar;
  const Index n = U.rows();
  const Index d = U.cols();
  const Index m = Q.cols();
  if (n < 1) throw InvalidArgument("lstsq_affine: need at least one row");
  if (Q.rows() != n) throw InvalidArgument("lstsq_affine: row count mismatch");
  if (!(ridge >= 0)) throw InvalidArgument("lstsq_affine: ridge must be >= 0");

  const Vector<Scalar> u_mean = U.colwise().mean().transpose();
  const Vector<Scalar> q_mean = Q.colwise().mean().transpose();

  AffineFit<Scalar> fit;
  fit.ridge = ridge;
  fit.L = Matrix<Scalar>::Zero(d, m);
  if (d > 0) {
    const Matrix<Scalar> Uc = U.rowwise() - u_mean.transpose();
    const Matrix<Scalar> Qc = Q.rowwise() - q_mean.transpose();
    Eigen::BDCSVD<Matrix<Scalar>> svd(Uc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const Scalar smax = sv.size() > 0 ? sv(0) : Scalar(0);
    const Scalar cutoff =
        smax * static_cast<Scalar>(std::max(n, d)) * std::numeric_limits<Scalar>::epsilon();
    Vector<Scalar> filter(sv.size());
    for (Index i = 0; i < sv.size(); ++i) {
      const Scalar s = sv(i);
      if (ridge > 0)
        filter(i) = s / (s * s + ridge);
      else
        filter(i) = s > cutoff ? Scalar(1) / s : Scalar(0);
    }
    fit.L = svd.matrixV() * filter.asDiagonal() * (svd.matrixU().transpose() * Qc);
  }
  fit.b = q_mean - fit.L.transpose() * u_mean;
  if (!fit.L.allFinite() || !fit.b.allFinite())
    throw NumericalError("lstsq_affine: non-finite coefficients");
  return fit;
}

/// Root-mean-square residual (per scalar entry) after aligning B onto A by the
/// best rotation/reflection and translation.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar procrustes_rigid(const Eigen::MatrixBase<DerivedA>& A,
                                           const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw InvalidArgument("procrustes_rigid: shape mismatch");
  if (A.rows() < A.cols()) throw InvalidArgument("procrustes_rigid: need N >= m");

  const Matrix<Scalar> Ac = A.rowwise() - A.colwise().mean();
  const Matrix<Scalar> Bc = B.rowwise() - B.colwise().mean();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(Bc.transpose() * Ac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix<Scalar> R = svd.matrixU() * svd.matrixV().transpose();
  const Scalar sq = (Ac - Bc * R).squaredNorm();
  return std::sqrt(sq / static_cast<Scalar>(A.size()));
}

}  // namespace chartbench
