#pragma once

// Diffusion maps: Gaussian affinity, optional density (alpha) normalization,
// Markov normalization diagonalized through its symmetric conjugate, nested
// truncation and Nystrom extension.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "chartbench/errors.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

/// How the kernel scale beta is chosen: a fixed value, or c / median(D2 off-diagonal).
struct BetaRule {
  enum class Kind { explicit_value, median_scaled };

  Kind kind = Kind::median_scaled;
  double value = 50.0;

  static BetaRule explicit_beta(double beta) { return {Kind::explicit_value, beta}; }
  static BetaRule median_scaled(double c) { return {Kind::median_scaled, c}; }

  /// "median:<c>", "explicit:<beta>" or a bare number (explicit).
  static BetaRule parse(const std::string& text);
  std::string to_string() const;
};

struct KernelConfig {
  BetaRule rule;
  double alpha = 0.0;
  double beta = 0.0;  // resolved value; 0 until a fit resolves it

  void validate() const;
};

template <typename Scalar>
struct DiffusionBasis {
  Vector<Scalar> lambdas;  // descending, lambdas[0] = 1
  Matrix<Scalar> psi;      // N x k right eigenvectors; column 0 constant
  Vector<Scalar> degrees;  // row sums of the alpha-normalized kernel
  Vector<Scalar> density;  // row sums of the raw kernel (alpha-normalization input)
  KernelConfig config;
  Matrix<Scalar> train_X;

  Index size() const { return lambdas.size(); }
  Index num_points() const { return psi.rows(); }
};

inline BetaRule BetaRule::parse(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v > 0)) throw InvalidArgument("invalid beta rule: '" + text + "'");
    return v;
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) return explicit_beta(number(text));
  const std::string head = text.substr(0, colon);
  const std::string tail = text.substr(colon + 1);
  if (head == "median") return median_scaled(number(tail));
  if (head == "explicit") return explicit_beta(number(tail));
  throw InvalidArgument("invalid beta rule: '" + text + "'");
}

inline std::string BetaRule::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%.17g", kind == Kind::median_scaled ? "median" : "explicit",
                value);
  return buf;
}

inline void KernelConfig::validate() const {
  if (!(rule.value > 0)) throw InvalidArgument("beta rule value must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

/// P = exp(-beta * D2), entrywise.
template <typename Derived>
Matrix<typename Derived::Scalar> gaussian_kernel(const Eigen::MatrixBase<Derived>& D2,
                                                 double beta) {
  using Scalar = typename Derived::Scalar;
  if (!(beta > 0)) throw InvalidArgument("gaussian_kernel: beta must be positive");
  return (D2.array() * Scalar(-beta)).exp().matrix();
}

/// Median of the strictly-upper-triangular entries of D2.
template <typename Derived>
double median_offdiagonal(const Eigen::MatrixBase<Derived>& D2) {
  const Index n = D2.rows();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) values.push_back(static_cast<double>(D2(i, j)));
  if (values.empty()) throw InvalidArgument("median_offdiagonal: need at least two points");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  double med = *mid;
  if (values.size() % 2 == 0) med = 0.5 * (med + *std::max_element(values.begin(), mid));
  return med;
}

template <typename Derived>
double resolve_beta(const Eigen::MatrixBase<Derived>& D2, const BetaRule& rule) {
  if (D2.rows() < 2) throw InvalidArgument("resolve_beta: need N >= 2");
  if (!(rule.value > 0)) throw InvalidArgument("resolve_beta: rule value must be positive");
  if (rule.kind == BetaRule::Kind::explicit_value) return rule.value;
  const double med = median_offdiagonal(D2);
  if (!(med > 0))
    throw InvalidArgument("resolve_beta: median pairwise squared distance is zero (duplicate points)");
  return rule.value / med;
}

/// P_alpha(i, j) = P(i, j) / (q_i^alpha q_j^alpha) with q = P 1.
template <typename Derived>
Matrix<typename Derived::Scalar> alpha_normalize(const Eigen::MatrixBase<Derived>& P,
                                                 double alpha) {
  using Scalar = typename Derived::Scalar;
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha_normalize: alpha must lie in [0, 1]");
  if (alpha == 0.0) return P;
  const Vector<Scalar> q = P.rowwise().sum();
  const Vector<Scalar> scale = q.array().pow(Scalar(-alpha)).matrix();
  return scale.asDiagonal() * P * scale.asDiagonal();
}

template <typename Derived>
void reject_duplicates(const Eigen::MatrixBase<Derived>& D2) {
  for (Index j = 1; j < D2.rows(); ++j)
    for (Index i = 0; i < j; ++i)
      if (D2(i, j) == 0)
        throw InvalidArgument("duplicate points at rows " + std::to_string(i) + " and " +
                              std::to_string(j));
}

/// Fits the first k diffusion modes of the point cloud X (N x D).
template <typename Derived>
DiffusionBasis<typename Derived::Scalar> fit_diffusion(const Eigen::MatrixBase<Derived>& X,
                                                       KernelConfig config, Index k) {
  using Scalar = typename Derived::Scalar;
  config.validate();
  const Index n = X.rows();
  if (n < 2) throw InvalidArgument("fit_diffusion: need at least two points");
  if (k < 1 || k > n) throw InvalidArgument("fit_diffusion: k must lie in [1, N]");

  const Matrix<Scalar> D2 = pairwise_sq_dists(X);
  reject_duplicates(D2);
  config.beta = resolve_beta(D2, config.rule);

  DiffusionBasis<Scalar> basis;
  basis.config = config;
  basis.train_X = X;

  Matrix<Scalar> P = gaussian_kernel(D2, config.beta);
  basis.density = P.rowwise().sum();
  if (config.alpha != 0.0) P = alpha_normalize(P, config.alpha);
  basis.degrees = P.rowwise().sum();

  const Vector<Scalar> inv_sqrt = basis.degrees.array().rsqrt().matrix();
  Matrix<Scalar> S = inv_sqrt.asDiagonal() * P * inv_sqrt.asDiagonal();
  S = Scalar(0.5) * (S + S.transpose()).eval();
  P.resize(0, 0);

  SymSpectrum<Scalar> spec = sym_eig(S, k);
  basis.lambdas = spec.values;
  const Scalar window = Scalar(1e-9);
  for (Index i = 0; i < k; ++i) {
    Scalar& l = basis.lambdas(i);
    if (l > Scalar(1) && l <= Scalar(1) + window) l = Scalar(1);
    if (l < Scalar(0) && l >= -window) l = Scalar(0);
  }

  // psi = D^{-1/2} v has weighted norm sum_i pi_i psi_i^2 = 1 / sum(deg); rescale to 1.
  const Scalar total = basis.degrees.sum();
  basis.psi = (inv_sqrt * std::sqrt(total)).asDiagonal() * spec.vectors;
  return basis;
}

/// Row-stochastic operator P+ = diag(degrees)^-1 P_alpha rebuilt from the basis.
template <typename Scalar>
Matrix<Scalar> markov_operator(const DiffusionBasis<Scalar>& basis) {
  Matrix<Scalar> P = gaussian_kernel(pairwise_sq_dists(basis.train_X), basis.config.beta);
  if (basis.config.alpha != 0.0) P = alpha_normalize(P, basis.config.alpha);
  const Vector<Scalar> rows = P.rowwise().sum();
  return rows.cwiseInverse().asDiagonal() * P;
}

/// Random-walk Laplacian eigenvalues mu_n = 1 - lambda_n (ascending).
template <typename Scalar>
Vector<Scalar> laplacian_spectrum(const DiffusionBasis<Scalar>& basis) {
  return (Scalar(1) - basis.lambdas.array()).matrix();
}

/// Diffusion coordinates 1..d; the constant mode 0 is not part of the embedding.
template <typename Scalar>
BasicEmbedding<Scalar> truncate(const DiffusionBasis<Scalar>& basis, Index d) {
  if (d < 0 || d >= basis.size())
    throw InvalidArgument("truncate: d must lie in [0, k - 1], got " + std::to_string(d));
  BasicEmbedding<Scalar> emb;
  emb.U = basis.psi.middleCols(1, d);
  emb.method = Method::dmap;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", basis.config.beta);
  emb.meta["beta"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", basis.config.alpha);
  emb.meta["alpha"] = buf;
  return emb;
}

/// Extends modes 0..modes-1 to new points: psi_new[:, n] = (P+_cross psi[:, n]) / lambda_n.
template <typename Scalar, typename Derived>
Matrix<Scalar> nystrom_extend(const DiffusionBasis<Scalar>& basis,
                              const Eigen::MatrixBase<Derived>& X_new, Index modes) {
  if (basis.train_X.size() == 0) throw InvalidArgument("nystrom_extend: basis has no training data");
  if (X_new.cols() != basis.train_X.cols())
    throw InvalidArgument("nystrom_extend: dimension mismatch with training data");
  if (modes < 1 || modes > basis.size()) throw InvalidArgument("nystrom_extend: bad mode count");
  for (Index n = 0; n < modes; ++n)
    if (!(basis.lambdas(n) > Scalar(1e-12)))
      throw ModeExtensionError(n, static_cast<double>(basis.lambdas(n)));

  Matrix<Scalar> K = gaussian_kernel(cross_sq_dists(X_new, basis.train_X), basis.config.beta);
  const double alpha = basis.config.alpha;
  if (alpha != 0.0) {
    const Vector<Scalar> fresh = K.rowwise().sum();
    const Vector<Scalar> left = fresh.array().pow(Scalar(-alpha)).matrix();
    const Vector<Scalar> right = basis.density.array().pow(Scalar(-alpha)).matrix();
    K = left.asDiagonal() * K * right.asDiagonal();
  }
  const Vector<Scalar> rows = K.rowwise().sum();
  const Matrix<Scalar> Pplus = rows.cwiseInverse().asDiagonal() * K;
  const Vector<Scalar> inv_lambda = basis.lambdas.head(modes).cwiseInverse();
  return (Pplus * basis.psi.leftCols(modes)) * inv_lambda.asDiagonal();
}

template <typename Scalar, typename Derived>
Matrix<Scalar> nystrom_extend(const DiffusionBasis<Scalar>& basis,
                              const Eigen::MatrixBase<Derived>& X_new) {
  return nystrom_extend(basis, X_new, basis.size());
}

}  // namespace chartbench
