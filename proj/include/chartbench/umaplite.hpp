#pragma once

// UMAP-lite: a simplified, self-contained approximation of UMAP. Smoothed-kNN
// fuzzy graph, spectral initialization and sequential stochastic cross-entropy
// layout optimization with negative sampling. Fidelity to reference UMAP is
// qualitative only.

#include <Eigen/SparseCore>

#include <cstdint>

#include "chartbench/types.hpp"

namespace chartbench {

struct FuzzyGraph {
  Eigen::SparseMatrix<double> memberships;  // symmetric, entries in (0, 1]
  VectorXd rho;                             // distance to nearest neighbor
  VectorXd sigma;                           // calibrated bandwidth
  VectorXd calibration_residual;            // |sum_j exp(-(d_ij - rho_i)/sigma_i) - log2(k)|
  int k = 0;

  Index size() const { return memberships.rows(); }
};

/// Calibrates sigma_i by bisection so that the k neighbor memberships
/// exp(-max(0, d - rho_i) / sigma_i) sum to log2(k), then symmetrizes with the
/// probabilistic t-conorm w = a + b - a b.
FuzzyGraph build_fuzzy_graph(const MatrixXd& X, int k);

/// Parameters of the low-dimensional similarity 1 / (1 + a r^(2b)).
struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};

/// Least-squares fit of 1 / (1 + a r^(2b)) to 1 for r < min_dist and
/// exp(-(r - min_dist) / spread) beyond, on 300 points over [0, 3 spread].
CurveParams fit_curve_params(double spread = 1.0, double min_dist = 0.1);

struct LayoutOptions {
  int epochs = 200;
  int negative_samples = 5;
  std::uint64_t seed = 7;
  double initial_step = 1.0;
  CurveParams curve;  // fitted with defaults when a == 0
};

/// Leading nontrivial eigenvectors of D^-1/2 W D^-1/2 (columns 1..d), unscaled.
/// Nested in d, so one call at the largest d serves a whole scan.
MatrixXd spectral_modes(const FuzzyGraph& g, Index d);

/// Rescales so the largest absolute coordinate is 10.
MatrixXd scale_to_spread(MatrixXd init);

/// scale_to_spread(spectral_modes(g, d)).
MatrixXd spectral_init(const FuzzyGraph& g, Index d);

/// Optimizes a layout starting from `init` (N x d).
Embedding optimize_layout(const FuzzyGraph& g, MatrixXd init, const LayoutOptions& options);

Embedding optimize_layout(const FuzzyGraph& g, Index d, int epochs, std::uint64_t seed);

}  // namespace chartbench
