// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "chartbench/diagnostics.hpp"
#include "chartbench/dmap.hpp"
#include "chartbench/isomap.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/pipeline.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/synth.hpp"

using namespace chartbench;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

Dataset default_dataset(Index n) {
  RunConfig config;
  config.n = n;
  return make_dataset(config);
}

Verdict isometry_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  const Dataset ds = default_dataset(2000);
  const double dev = verify_isometry(ds, 1e-4);
  v.check(dev <= 1e-4, "isometry deviation " + fmt("%.3g", dev));

  const Dataset flat = default_dataset(500);
  const MatrixXd G = pairwise_sq_dists(flat.chart.Q).cwiseSqrt();
  const MdsResult mds = classical_mds(G, 2);
  const double resid = procrustes_rigid(flat.chart.Q, mds.embedding.U);
  const double bound = 1e-6 * flat.chart.Q.norm();
  v.check(resid <= bound, "flat MDS procrustes " + fmt("%.3g", resid) + " <= " + fmt("%.3g", bound));
  const double t = seconds_since(t0);
  v.check(t <= 30, "runtime " + fmt("%.1f s", t));
  return v;
}

Verdict spectral_suite() {
  Verdict v;
  const Index n = 300;
  const Dataset ds = default_dataset(n);
  const auto basis = fit_diffusion(ds.X, KernelConfig{}, n);
  const MatrixXd P = markov_operator(basis);

  const double row_dev = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
  v.check(row_dev <= 1e-12, "row sums " + fmt("%.3g", row_dev));

  const VectorXd psi0 = basis.psi.col(0);
  const double spread = (psi0.maxCoeff() - psi0.minCoeff()) / psi0.cwiseAbs().maxCoeff();
  v.check(std::abs(basis.lambdas(0) - 1.0) <= 1e-12 && spread <= 1e-8,
          "lambda0 " + fmt("%.17g", basis.lambdas(0)) + ", psi0 spread " + fmt("%.3g", spread));

  const bool in_range =
      (basis.lambdas.array() >= -1e-9).all() && (basis.lambdas.array() <= 1.0 + 1e-9).all();
  v.check(in_range, "lambda range [" + fmt("%.3g", basis.lambdas.minCoeff()) + ", " +
                        fmt("%.17g", basis.lambdas.maxCoeff()) + "]");

  double resid = 0;
  for (Index k = 0; k < n; ++k) {
    const VectorXd r = P * basis.psi.col(k) - basis.lambdas(k) * basis.psi.col(k);
    resid = std::max(resid, r.cwiseAbs().maxCoeff() / basis.psi.col(k).cwiseAbs().maxCoeff());
  }
  v.check(resid <= 1e-7, "eigen residual " + fmt("%.3g", resid));

  Eigen::EigenSolver<MatrixXd> solver(P, false);
  std::vector<double> markov;
  double imag = 0;
  for (Index i = 0; i < n; ++i) {
    markov.push_back(solver.eigenvalues()(i).real());
    imag = std::max(imag, std::abs(solver.eigenvalues()(i).imag()));
  }
  std::sort(markov.rbegin(), markov.rend());
  double gap = imag;
  for (Index i = 0; i < n; ++i) gap = std::max(gap, std::abs(markov[static_cast<std::size_t>(i)] - basis.lambdas(i)));
  v.check(gap <= 1e-9, "S vs P+ eigenvalues " + fmt("%.3g", gap));
  return v;
}

Verdict ordering(const ScanTable& scan, double runtime) {
  Verdict v;
  std::vector<ScanRow> dm = scan.rows_for(Method::dmap);
  std::vector<ScanRow> iso = scan.rows_for(Method::isomap);
  bool all_ok = true;
  for (const auto* rows : {&dm, &iso})
    for (const auto& r : *rows) all_ok = all_ok && r.ok();
  v.check(all_ok, "all scan rows ok");
  if (!all_ok) return v;

  auto at = [](const std::vector<ScanRow>& rows, Index d) {
    for (const auto& r : rows)
      if (r.d == d) return r.frob_sq;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double iso2 = at(iso, 2), dm2 = at(dm, 2);
  v.check(iso2 <= 0.2 * dm2, "d=2 isomap " + fmt("%.4g", iso2) + " vs dmap " + fmt("%.4g", dm2));

  double worst = 0;
  for (std::size_t i = 1; i < dm.size(); ++i)
    worst = std::max(worst, (dm[i].frob_sq - dm[i - 1].frob_sq) / dm[i - 1].frob_sq);
  v.check(worst <= 1e-9, "dmap max relative increase " + fmt("%.3g", worst));

  double iso_min = std::numeric_limits<double>::infinity();
  for (const auto& r : iso) iso_min = std::min(iso_min, r.frob_sq);
  Index cross = -1;
  for (const auto& r : dm)
    if (r.frob_sq < iso_min) {
      cross = r.d;
      break;
    }
  v.check(cross > 0, "dmap below isomap min " + fmt("%.4g", iso_min) + " from d=" + std::to_string(cross));
  v.check(runtime <= 300, "runtime " + fmt("%.1f s", runtime));
  return v;
}

Verdict isomap_quality(const ScanTable& scan) {
  Verdict v;
  for (const auto& r : scan.rows_for(Method::isomap))
    if (r.d == 2) {
      v.check(r.ok() && r.rel_frob <= 0.1, "rel_frob " + fmt("%.4g", r.rel_frob));
      return v;
    }
  v.check(false, "no isomap d=2 row");
  return v;
}

Verdict readout_invariances() {
  Verdict v;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  double worst_scale = 0, worst_affine = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = 100 + 20 * inst, d = 1 + inst % 8;
    const MatrixXd U = random_matrix(n, d, 100 + inst);
    const MatrixXd Q = random_matrix(n, 2, 200 + inst) + U.leftCols(1) * MatrixXd::Ones(1, 2);
    const double base = fit_oracle(U, Q, 0.0).frob_sq;

    VectorXd c(d);
    for (Index j = 0; j < d; ++j) c(j) = std::pow(10.0, log_scale(gen));
    const double scaled = fit_oracle(U * c.asDiagonal(), Q, 0.0).frob_sq;
    worst_scale = std::max(worst_scale, std::abs(scaled - base) / base);

    const MatrixXd A = random_matrix(d, d, 300 + inst) + 3.0 * MatrixXd::Identity(d, d);
    const Eigen::RowVectorXd shift = random_matrix(1, d, 400 + inst) * 10.0;
    const MatrixXd mixed = (U * A).rowwise() + shift;
    const double remixed = fit_oracle(mixed, Q, 0.0).frob_sq;
    worst_affine = std::max(worst_affine, std::abs(remixed - base) / base);
  }
  v.check(worst_scale <= 1e-8, "rescaling " + fmt("%.3g", worst_scale));
  v.check(worst_affine <= 1e-8, "affine remix " + fmt("%.3g", worst_affine));
  return v;
}

Verdict weyl_slope() {
  Verdict v;
  const auto t0 = Clock::now();
  const Dataset ds = default_dataset(1000);
  const MatrixXd D2 = pairwise_sq_dists(ds.X);
  const RunConfig defaults;
  const std::vector<double> betas = defaults.beta_grid.values();
  const RankReport report = rank_scan(D2, betas, defaults.tau);
  if (report.weyl_slope) {
    const double s = *report.weyl_slope;
    v.check(std::abs(s - 1.0) <= 0.35 && report.fit_r2 >= 0.9,
            "slope " + fmt("%.4f", s) + ", r2 " + fmt("%.4f", report.fit_r2));
  } else {
    v.check(false, "no qualifying window");
  }

  const double med = median_offdiagonal(D2);
  const EffectiveRanks low = effective_ranks(gaussian_kernel(D2, 1e-8 / med), defaults.tau);
  v.check(low.threshold == 1 && std::abs(low.stable - 1) <= 1e-6 && std::abs(low.entropy - 1) <= 1e-3,
          "rank-one limit " + std::to_string(low.threshold) + "/" + fmt("%.4g", low.stable) + "/" +
              fmt("%.4g", low.entropy));
  const EffectiveRanks high = effective_ranks(gaussian_kernel(D2, 1e8 / med), defaults.tau);
  const double floor = 0.95 * static_cast<double>(ds.size());
  v.check(static_cast<double>(high.threshold) >= floor && high.stable >= floor && high.entropy >= floor,
          "identity limit " + std::to_string(high.threshold) + "/" + fmt("%.1f", high.stable) + "/" +
              fmt("%.1f", high.entropy));
  const double t = seconds_since(t0);
  v.check(t <= 120, "runtime " + fmt("%.1f s", t));
  return v;
}

Verdict nystrom(const DiffusionBasis<double>& basis) {
  Verdict v;
  Index modes = 0;
  while (modes < basis.size() && basis.lambdas(modes) >= 1e-6) ++modes;
  const MatrixXd ext = nystrom_extend(basis, basis.train_X, modes);
  const double err = (ext - basis.psi.leftCols(modes)).cwiseAbs().maxCoeff();
  v.check(err <= 1e-6, std::to_string(modes) + " modes, max error " + fmt("%.3g", err));
  return v;
}

Verdict mode_pairs(const DiffusionBasis<double>& basis, const Dataset& ds) {
  Verdict v;
  const PairChartReport report = pair_charts(basis, 0, 1, 10, ds.chart.Q, 20);
  const auto best = std::min_element(report.rows.begin(), report.rows.end(), [](const PairRow& a, const PairRow& b) {
    return a.pair_readout_rel_frob < b.pair_readout_rel_frob;
  });
  v.check(best->partner >= 5 && best->partner <= 7,
          "argmin partner " + std::to_string(best->partner) + " (" + fmt("%.4f", best->pair_readout_rel_frob) + ")");
  double rival = 0;
  for (const auto& r : report.rows)
    if (r.partner <= 4) rival = std::max(rival, r.novelty);
  v.check(best->novelty > rival, "novelty " + fmt("%.4f", best->novelty) + " > " + fmt("%.4f", rival));
  return v;
}

Verdict ambient(const DiffusionBasis<double>& basis, const Dataset& ds) {
  Verdict v;
  const double r8 = reconstruct_ambient(basis, ds.X, 8).rel_frob;
  const double r64 = reconstruct_ambient(basis, ds.X, 64).rel_frob;
  v.check(r64 < r8, "d=64 " + fmt("%.4g", r64) + " < d=8 " + fmt("%.4g", r8));

  const Index n = 500;
  const Dataset small = default_dataset(n);
  const auto full = fit_diffusion(small.X, KernelConfig{}, n);
  const double rfull = reconstruct_ambient(full, small.X, n - 1).rel_frob;
  v.check(rfull <= 1e-6, "d=N-1 " + fmt("%.3g", rfull));
  return v;
}

AffineFit<double> normal_equations(const MatrixXd& U, const MatrixXd& Q, double ridge) {
  const Index n = U.rows(), d = U.cols();
  MatrixXd A(n, d + 1);
  A << U, MatrixXd::Ones(n, 1);
  MatrixXd G = A.transpose() * A;
  for (Index i = 0; i < d; ++i) G(i, i) += ridge;
  const MatrixXd coef = G.ldlt().solve(A.transpose() * Q);
  AffineFit<double> f;
  f.L = coef.topRows(d);
  f.b = coef.row(d).transpose();
  return f;
}

NeighborGraph integer_graph(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> weight(1, 20);
  std::uniform_int_distribution<Index> node(0, n - 1);
  std::vector<std::tuple<Index, Index, double>> edges;
  for (Index i = 1; i < n; ++i) {
    std::uniform_int_distribution<Index> parent(0, i - 1);
    edges.emplace_back(i, parent(gen), weight(gen));
  }
  for (Index e = 0; e < 3 * n; ++e) {
    const Index a = node(gen), b = node(gen);
    if (a != b) edges.emplace_back(a, b, weight(gen));
  }
  return graph_from_edges(n, edges);
}

MatrixXd floyd_warshall(const NeighborGraph& g) {
  const Index n = g.size();
  MatrixXd D = MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Index i = 0; i < n; ++i) {
    D(i, i) = 0;
    for (const auto& e : g.adjacency[static_cast<std::size_t>(i)]) D(i, e.target) = std::min(D(i, e.target), e.weight);
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) D(i, j) = std::min(D(i, j), D(i, k) + D(k, j));
  return D;
}

Verdict oracle_equivalence() {
  Verdict v;
  double lsq = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MatrixXd U = random_matrix(200, 6, seed) * 2.0;
    const MatrixXd Q = random_matrix(200, 3, seed + 50);
    for (double ridge : {0.0, 1e-3}) {
      const AffineFit<double> got = lstsq_affine(U, Q, ridge);
      const AffineFit<double> want = normal_equations(U, Q, ridge);
      lsq = std::max({lsq, (got.L - want.L).cwiseAbs().maxCoeff(), (got.b - want.b).cwiseAbs().maxCoeff()});
    }
  }
  v.check(lsq <= 1e-8, "lstsq vs normal equations " + fmt("%.3g", lsq));

  bool exact = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const NeighborGraph g = integer_graph(120, seed);
    exact = exact && (geodesics(g).G.array() == floyd_warshall(g).array()).all();
  }
  v.check(exact, "geodesics vs Floyd-Warshall exact");

  double pd = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const MatrixXd X = random_matrix(150, 5, seed + 90) * 3.0;
    const MatrixXd D2 = pairwise_sq_dists(X);
    for (Index i = 0; i < X.rows(); ++i)
      for (Index j = 0; j < X.rows(); ++j) {
        double s = 0;
        for (Index c = 0; c < X.cols(); ++c) s += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
        pd = std::max(pd, std::abs(D2(i, j) - s) / std::max(1.0, s));
      }
  }
  v.check(pd <= 1e-12, "pairwise vs double loop " + fmt("%.3g", pd));
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Verdict& v, double secs) {
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };
  auto timed = [&](int id, const char* name, const std::function<Verdict()>& body) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.check(false, std::string("threw: ") + e.what());
    }
    report(id, name, v, seconds_since(t0));
  };

  timed(1, "isometry suite", isometry_suite);
  timed(2, "spectral suite", spectral_suite);

  const Dataset ds = default_dataset(2000);
  const ScanParams params = make_scan_params(RunConfig{});
  const auto t_basis = Clock::now();
  const DiffusionBasis<double> basis = fit_diffusion(ds.X, params.dmap, ds.size());
  const double basis_s = seconds_since(t_basis);

  ScanTable scan;
  double scan_s = 0;
  {
    const auto t0 = Clock::now();
    const std::vector<Index> dims = default_scan_dims();
    const std::vector<Method> methods{Method::dmap, Method::isomap};
    try {
      scan = run_scan(ds, dims, methods, params);
    } catch (const std::exception& e) {
      std::printf("scan threw: %s\n", e.what());
    }
    scan_s = seconds_since(t0);
  }
  timed(3, "error ordering", [&] { return ordering(scan, scan_s); });
  timed(4, "isomap chart quality", [&] { return isomap_quality(scan); });
  timed(5, "readout invariances", readout_invariances);
  timed(6, "weyl slope", weyl_slope);
  timed(7, "nystrom", [&] { return nystrom(basis); });
  timed(8, "mode pairs", [&] { return mode_pairs(basis, ds); });
  timed(9, "ambient reconstruction", [&] { return ambient(basis, ds); });
  timed(10, "oracle equivalence", oracle_equivalence);

  std::printf("shared basis fit %.1f s; %d criteria failed\n", basis_s, failures);
  return failures == 0 ? 0 : 1;
}
