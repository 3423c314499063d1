#pragma once

// Oracle affine readout Q ~ U L + b, reconstruction metrics, and the
// dimension scan across methods.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartbench/dmap.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/synth.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

struct ReadoutFit {
  AffineFit<double> fit;
  MatrixXd predicted;  // U L + 1 b^T
  double frob_sq = 0;  // |Q - Qhat|_F^2
  double mse = 0;      // frob_sq / (N m)
  double rel_frob = 0; // |Q - Qhat|_F / |Q - mean(Q)|_F
};

/// Fits the affine readout of Q from U. Without an explicit ridge the default
/// 1e-10 * trace(U^T U) / d is used.
ReadoutFit fit_oracle(const MatrixXd& U, const MatrixXd& Q, std::optional<double> ridge = {});
inline ReadoutFit fit_oracle(const Embedding& emb, const MatrixXd& Q,
                             std::optional<double> ridge = {}) {
  return fit_oracle(emb.U, Q, ridge);
}

/// Reconstructs the ambient coordinates X from diffusion modes 1..d (d = 0: bias only).
ReadoutFit reconstruct_ambient(const DiffusionBasis<double>& basis, const MatrixXd& X, Index d,
                               std::optional<double> ridge = {});

/// The dimension grid 1..8, 16, ..., 1024.
std::vector<Index> default_scan_dims();

struct ScanRow {
  Method method = Method::dmap;
  Index d = 0;
  double frob_sq = 0;
  double mse = 0;
  double rel_frob = 0;
  double wall_ms = 0;
  std::string status = "ok";  // "ok" or "FAILED: <reason>"

  bool ok() const { return status == "ok"; }
};

struct ScanTable {
  std::vector<ScanRow> rows;
  std::map<std::string, std::string> resolved;  // e.g. beta, clamped MDS modes
  std::map<std::string, double> setup_ms;       // shared per-method work (basis, graph, ...)

  std::vector<ScanRow> rows_for(Method m) const;
};

struct ScanParams {
  KernelConfig dmap;
  int isomap_k = 10;
  int umap_k = 15;
  int umap_epochs = 200;
  std::uint64_t umap_seed = 7;
  std::optional<double> ridge;  // default rule when empty

  /// Optional pre-fitted basis with at least max(dims) + 1 modes; fitted on demand otherwise.
  const DiffusionBasis<double>* dmap_basis = nullptr;
  /// Called for every successful row with the embedding and its readout.
  std::function<void(const ScanRow&, const Embedding&, const ReadoutFit&)> observer;
};

/// DMAP is fitted once and truncated per d; Isomap and UMAP-lite produce a new
/// embedding per d (sharing d-independent work: graph, geodesics, spectral modes).
/// A failing method marks its rows failed and the scan continues.
ScanTable run_scan(const Dataset& ds, std::span<const Index> dims, std::span<const Method> methods,
                   const ScanParams& params);

}  // namespace chartbench
