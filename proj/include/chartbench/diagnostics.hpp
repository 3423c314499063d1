#pragma once

// Spectral diagnostics: effective ranks of the Gaussian kernel across scales with
// a Weyl-law slope fit, readout spectra of the DMAP chart fit, and mode-pair
// charts scored by a local-dimension novelty heuristic.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "chartbench/dmap.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

struct EffectiveRanks {
  Index threshold = 0;  // #{lambda_i >= tau * lambda_max}
  double stable = 0;    // sum lambda_i^2 / lambda_max^2
  double entropy = 0;   // exp(-sum p_i ln p_i), p = lambda / sum(lambda)
};

/// Effective ranks from a spectrum (any order). Entries in [-1e-9 lambda_max, 0)
/// are treated as zero; more negative ones are rejected as not PSD.
EffectiveRanks effective_ranks_from_spectrum(const VectorXd& eigenvalues, double tau);

template <typename Derived>
EffectiveRanks effective_ranks(const Eigen::MatrixBase<Derived>& P, double tau) {
  return effective_ranks_from_spectrum(sym_eigvals(P).template cast<double>(), tau);
}

struct RankRow {
  double beta = 0;
  Index threshold_rank = 0;
  double stable_rank = 0;
  double entropy_rank = 0;
};

struct RankReport {
  std::vector<RankRow> rows;
  Index n = 0;
  std::optional<double> weyl_slope;  // empty when no window qualifies
  std::optional<std::pair<double, double>> weyl_window;
  double fit_r2 = 0;
};

/// count values log-spaced over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

/// Effective ranks of exp(-beta D2) for each beta, and the least-squares slope of
/// ln(entropy rank) on ln(beta) over the widest contiguous run of betas with
/// 3 <= entropy rank <= 0.3 N.
RankReport rank_scan(const MatrixXd& D2, std::span<const double> betas, double tau);

struct SpectrumRow {
  Index n = 0;  // diffusion mode index (1 = first nontrivial)
  double one_minus_lambda = 0;
  double coeff_mag_s = 0;
  double coeff_mag_h = 0;
};

struct ReadoutSpectrum {
  std::vector<SpectrumRow> rows;
};

/// Pairs |L(n, :)| of a DMAP readout (fit on modes 1..d) with mu_n = 1 - lambda_n.
ReadoutSpectrum readout_spectrum(const ReadoutFit& fit, const DiffusionBasis<double>& basis);

/// Fraction of variance of `partner` left after local linear regression on `base`
/// within sliding windows of `window` points ordered by base value. Clamped to [0, 1].
double novelty(const VectorXd& base, const VectorXd& partner, int window = 20);

struct PairRow {
  Index partner = 0;
  double novelty = 0;
  double pair_readout_rel_frob = 0;
};

struct PairChartReport {
  Index base = 0;
  std::vector<PairRow> rows;       // sorted by partner
  std::vector<MatrixXd> scatter;   // N x 2 (base, partner) coordinates per row
  MatrixXd truth;                  // the chart the pairs are scored against
};

/// Mode indices count nontrivial modes only: mode 0 is psi column 1.
/// Partners run over [first, last] inclusive.
PairChartReport pair_charts(const DiffusionBasis<double>& basis, Index base, Index first,
                            Index last, const MatrixXd& Q, int window = 20);

}  // namespace chartbench
