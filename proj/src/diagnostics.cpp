#include "chartbench/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chartbench/errors.hpp"
#include "chartbench/parallel.hpp"

namespace chartbench {

EffectiveRanks effective_ranks_from_spectrum(const VectorXd& eigenvalues, double tau) {
  if (!(tau > 0 && tau < 1)) throw InvalidArgument("effective_ranks: tau must lie in (0, 1)");
  if (eigenvalues.size() == 0) throw InvalidArgument("effective_ranks: empty spectrum");
  const double lmax = eigenvalues.maxCoeff();
  if (!(lmax > 0)) throw InvalidArgument("effective_ranks: largest eigenvalue must be positive");
  if (eigenvalues.minCoeff() < -1e-9 * lmax)
    throw InvalidArgument("effective_ranks: matrix is not positive semidefinite");

  const VectorXd l = eigenvalues.cwiseMax(0.0);
  EffectiveRanks r;
  r.threshold = (l.array() >= tau * lmax).count();
  r.stable = l.squaredNorm() / (lmax * lmax);
  const double total = l.sum();
  double h = 0.0;
  for (Index i = 0; i < l.size(); ++i) {
    const double p = l(i) / total;
    if (p > 0) h -= p * std::log(p);
  }
  r.entropy = std::exp(h);
  return r;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi > lo) || count < 2) throw InvalidArgument("log_spaced: need 0 < lo < hi, count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

RankReport rank_scan(const MatrixXd& D2, std::span<const double> betas, double tau) {
  if (betas.size() < 3) throw InvalidArgument("rank_scan: need at least three betas");
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (!(betas[i] > betas[i - 1])) throw InvalidArgument("rank_scan: betas must be strictly increasing");

  RankReport report;
  report.n = D2.rows();
  report.rows.resize(betas.size());
  parallel_for(static_cast<Index>(betas.size()), [&](Index i) {
    const double beta = betas[static_cast<std::size_t>(i)];
    const EffectiveRanks r = effective_ranks(gaussian_kernel(D2, beta), tau);
    report.rows[static_cast<std::size_t>(i)] = {beta, r.threshold, r.stable, r.entropy};
  });

  // Widest contiguous window inside the Weyl regime (earliest on ties).
  const double upper = 0.3 * static_cast<double>(report.n);
  std::size_t best_lo = 0, best_len = 0;
  for (std::size_t i = 0; i < report.rows.size();) {
    auto inside = [&](std::size_t j) {
      return report.rows[j].entropy_rank >= 3.0 && report.rows[j].entropy_rank <= upper;
    };
    if (!inside(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < report.rows.size() && inside(j + 1)) ++j;
    if (j - i + 1 > best_len) {
      best_lo = i;
      best_len = j - i + 1;
    }
    i = j + 1;
  }
  if (best_len >= 2) {
    VectorXd x(static_cast<Index>(best_len)), y(static_cast<Index>(best_len));
    for (std::size_t t = 0; t < best_len; ++t) {
      x(static_cast<Index>(t)) = std::log(report.rows[best_lo + t].beta);
      y(static_cast<Index>(t)) = std::log(report.rows[best_lo + t].entropy_rank);
    }
    const double xm = x.mean(), ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    const double slope = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
    const double intercept = ym - slope * xm;
    const double ss_res = (y.array() - (intercept + slope * x.array())).square().sum();
    const double ss_tot = (y.array() - ym).square().sum();
    report.weyl_slope = slope;
    report.weyl_window = std::make_pair(report.rows[best_lo].beta, report.rows[best_lo + best_len - 1].beta);
    report.fit_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return report;
}

ReadoutSpectrum readout_spectrum(const ReadoutFit& fit, const DiffusionBasis<double>& basis) {
  const Index d = fit.fit.L.rows();
  if (fit.fit.L.cols() != 2) throw InvalidArgument("readout_spectrum: expected a two-column chart readout");
  if (d + 1 > basis.size())
    throw InvalidArgument("readout_spectrum: fit uses " + std::to_string(d) +
                          " modes but the basis has only " + std::to_string(basis.size() - 1));
  ReadoutSpectrum out;
  out.rows.reserve(static_cast<std::size_t>(d));
  for (Index n = 1; n <= d; ++n)
    out.rows.push_back({n, 1.0 - basis.lambdas(n), std::abs(fit.fit.L(n - 1, 0)),
                        std::abs(fit.fit.L(n - 1, 1))});
  return out;
}

double novelty(const VectorXd& base, const VectorXd& partner, int window) {
  const Index n = base.size();
  if (partner.size() != n) throw InvalidArgument("novelty: size mismatch");
  if (window < 2 || window > n) throw InvalidArgument("novelty: window must lie in [2, N]");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return base(a) < base(b); });

  const double var = (partner.array() - partner.mean()).square().mean();
  if (!(var > 0)) return 0.0;

  double ss = 0.0;
  for (Index t = 0; t < n; ++t) {
    const Index lo = std::clamp<Index>(t - window / 2, 0, n - window);
    double xm = 0, ym = 0;
    for (Index u = lo; u < lo + window; ++u) {
      xm += base(order[static_cast<std::size_t>(u)]);
      ym += partner(order[static_cast<std::size_t>(u)]);
    }
    xm /= window;
    ym /= window;
    double sxx = 0, sxy = 0;
    for (Index u = lo; u < lo + window; ++u) {
      const double dx = base(order[static_cast<std::size_t>(u)]) - xm;
      sxx += dx * dx;
      sxy += dx * (partner(order[static_cast<std::size_t>(u)]) - ym);
    }
    const Index i = order[static_cast<std::size_t>(t)];
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    const double resid = partner(i) - (ym + slope * (base(i) - xm));
    ss += resid * resid;
  }
  return std::clamp(ss / static_cast<double>(n) / var, 0.0, 1.0);
}

PairChartReport pair_charts(const DiffusionBasis<double>& basis, Index base, Index first,
                            Index last, const MatrixXd& Q, int window) {
  const Index modes = basis.size() - 1;  // nontrivial modes available
  if (base < 0 || base >= modes) throw InvalidArgument("pair_charts: base mode out of range");
  if (first < 0 || last < first || last >= modes)
    throw InvalidArgument("pair_charts: partner range out of range");
  if (Q.rows() != basis.num_points()) throw InvalidArgument("pair_charts: chart row count mismatch");

  PairChartReport report;
  report.base = base;
  report.truth = Q;
  const Index count = last - first + 1;
  report.rows.resize(static_cast<std::size_t>(count));
  report.scatter.resize(static_cast<std::size_t>(count));
  const VectorXd b = basis.psi.col(base + 1);
  parallel_for(count, [&](Index t) {
    const Index j = first + t;
    MatrixXd U(basis.num_points(), 2);
    U.col(0) = b;
    U.col(1) = basis.psi.col(j + 1);
    PairRow row;
    row.partner = j;
    row.novelty = novelty(b, U.col(1), window);
    row.pair_readout_rel_frob = fit_oracle(U, Q).rel_frob;
    report.rows[static_cast<std::size_t>(t)] = row;
    report.scatter[static_cast<std::size_t>(t)] = std::move(U);
  });
  return report;
}

}  // namespace chartbench
