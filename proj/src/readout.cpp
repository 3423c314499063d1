#include "chartbench/readout.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "chartbench/errors.hpp"
#include "chartbench/isomap.hpp"
#include "chartbench/parallel.hpp"
#include "chartbench/umaplite.hpp"

namespace chartbench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScanRow failed_row(Method m, Index d, const std::string& reason) {
  ScanRow row;
  row.method = m;
  row.d = d;
  row.frob_sq = row.mse = row.rel_frob = std::numeric_limits<double>::quiet_NaN();
  row.status = "FAILED: " + reason;
  return row;
}

ScanRow metrics_row(Method m, Index d, const ReadoutFit& fit, double ms) {
  ScanRow row;
  row.method = m;
  row.d = d;
  row.frob_sq = fit.frob_sq;
  row.mse = fit.mse;
  row.rel_frob = fit.rel_frob;
  row.wall_ms = ms;
  return row;
}

}  // namespace

ReadoutFit fit_oracle(const MatrixXd& U, const MatrixXd& Q, std::optional<double> ridge) {
  if (U.rows() != Q.rows()) throw InvalidArgument("fit_oracle: embedding and target row counts differ");
  if (!U.allFinite()) throw NumericalError("fit_oracle: embedding has non-finite entries");
  const double lambda = ridge.value_or(default_ridge(U));

  ReadoutFit out;
  out.fit = lstsq_affine(U, Q, lambda);
  out.predicted = out.fit.predict(U);
  out.frob_sq = (Q - out.predicted).squaredNorm();
  out.mse = out.frob_sq / static_cast<double>(Q.size());
  const double denom = (Q.rowwise() - Q.colwise().mean()).squaredNorm();
  if (denom > 0)
    out.rel_frob = std::sqrt(out.frob_sq / denom);
  else
    out.rel_frob = out.frob_sq == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return out;
}

ReadoutFit reconstruct_ambient(const DiffusionBasis<double>& basis, const MatrixXd& X, Index d,
                               std::optional<double> ridge) {
  if (X.rows() != basis.num_points()) throw InvalidArgument("reconstruct_ambient: row count mismatch");
  if (d < 0 || d >= basis.size())
    throw InvalidArgument("reconstruct_ambient: d must lie in [0, k - 1]");
  return fit_oracle(basis.psi.middleCols(1, d), X, ridge);
}

std::vector<Index> default_scan_dims() {
  return {1, 2, 3, 4, 5, 6, 7, 8, 16, 32, 64, 128, 256, 512, 1024};
}

std::vector<ScanRow> ScanTable::rows_for(Method m) const {
  std::vector<ScanRow> out;
  for (const auto& r : rows)
    if (r.method == m) out.push_back(r);
  return out;
}

namespace {

void scan_dmap(const Dataset& ds, std::span<const Index> dims, const ScanParams& params,
               ScanTable& table) {
  const Index max_d = *std::max_element(dims.begin(), dims.end());
  const Index n = ds.size();
  DiffusionBasis<double> owned;
  const DiffusionBasis<double>* basis = params.dmap_basis;
  try {
    const auto start = Clock::now();
    if (!basis) {
      owned = fit_diffusion(ds.X, params.dmap, std::min(max_d + 1, n));
      basis = &owned;
    }
    table.setup_ms["dmap"] = elapsed_ms(start);
    table.resolved["dmap.beta"] = format_number(basis->config.beta);
    table.resolved["dmap.alpha"] = format_number(basis->config.alpha);
    table.resolved["dmap.beta_rule"] = basis->config.rule.to_string();
    table.resolved["dmap.modes"] = std::to_string(basis->size());
  } catch (const std::exception& e) {
    for (Index d : dims) table.rows.push_back(failed_row(Method::dmap, d, e.what()));
    return;
  }
  for (Index d : dims) {
    try {
      const auto start = Clock::now();
      const Embedding emb = truncate(*basis, d);
      const ReadoutFit fit = fit_oracle(emb, ds.chart.Q, params.ridge);
      table.rows.push_back(metrics_row(Method::dmap, d, fit, elapsed_ms(start)));
      if (params.observer) params.observer(table.rows.back(), emb, fit);
    } catch (const std::exception& e) {
      table.rows.push_back(failed_row(Method::dmap, d, e.what()));
    }
  }
}

void scan_isomap(const Dataset& ds, std::span<const Index> dims, const ScanParams& params,
                 ScanTable& table) {
  const Index max_d = std::min(*std::max_element(dims.begin(), dims.end()), ds.size() - 1);
  MdsResult mds;
  try {
    const auto start = Clock::now();
    const NeighborGraph graph = knn_graph(ds.X, params.isomap_k);
    const GeodesicMatrix geo = geodesics(graph);
    mds = classical_mds(geo.G, max_d);
    table.setup_ms["isomap"] = elapsed_ms(start);
    table.resolved["isomap.k"] = std::to_string(params.isomap_k);
    table.resolved["isomap.max_edge"] = format_number(graph.max_edge());
  } catch (const DisconnectedGraph& e) {
    table.resolved["isomap.components"] = std::to_string(e.components());
    for (Index d : dims) table.rows.push_back(failed_row(Method::isomap, d, e.what()));
    return;
  } catch (const std::exception& e) {
    for (Index d : dims) table.rows.push_back(failed_row(Method::isomap, d, e.what()));
    return;
  }
  for (Index d : dims) {
    try {
      if (d < 1 || d > max_d) throw InvalidArgument("d must lie in [1, N-1]");
      const auto start = Clock::now();
      Embedding emb;
      emb.method = Method::isomap;
      emb.U = mds.embedding.U.leftCols(d);
      int clamped = 0;
      for (Index c = 0; c < d; ++c) clamped += mds.eigenvalues(c) > 0 ? 0 : 1;
      emb.meta["k"] = std::to_string(params.isomap_k);
      emb.meta["clamped_modes"] = std::to_string(clamped);
      const ReadoutFit fit = fit_oracle(emb, ds.chart.Q, params.ridge);
      table.rows.push_back(metrics_row(Method::isomap, d, fit, elapsed_ms(start)));
      if (params.observer) params.observer(table.rows.back(), emb, fit);
    } catch (const std::exception& e) {
      table.rows.push_back(failed_row(Method::isomap, d, e.what()));
    }
  }
  int clamped_total = 0;
  for (Index c = 0; c < mds.eigenvalues.size(); ++c) clamped_total += mds.eigenvalues(c) > 0 ? 0 : 1;
  table.resolved["isomap.clamped_modes"] = std::to_string(clamped_total);
}

void scan_umap(const Dataset& ds, std::span<const Index> dims, const ScanParams& params,
               ScanTable& table) {
  const Index max_d = std::min(*std::max_element(dims.begin(), dims.end()), ds.size() - 1);
  FuzzyGraph graph;
  MatrixXd modes;
  LayoutOptions options;
  try {
    const auto start = Clock::now();
    graph = build_fuzzy_graph(ds.X, params.umap_k);
    modes = spectral_modes(graph, max_d);
    options.epochs = params.umap_epochs;
    options.seed = params.umap_seed;
    options.curve = fit_curve_params();
    table.setup_ms["umap"] = elapsed_ms(start);
    table.resolved["umap.k"] = std::to_string(params.umap_k);
    table.resolved["umap.epochs"] = std::to_string(params.umap_epochs);
    table.resolved["umap.seed"] = std::to_string(params.umap_seed);
    table.resolved["umap.curve_a"] = format_number(options.curve.a);
    table.resolved["umap.curve_b"] = format_number(options.curve.b);
  } catch (const std::exception& e) {
    for (Index d : dims) table.rows.push_back(failed_row(Method::umap, d, e.what()));
    return;
  }

  struct Result {
    ScanRow row;
    Embedding emb;
    ReadoutFit fit;
  };
  std::vector<Result> results(dims.size());
  parallel_for(static_cast<Index>(dims.size()), [&](Index i) {
    const Index d = dims[static_cast<std::size_t>(i)];
    Result& r = results[static_cast<std::size_t>(i)];
    try {
      if (d < 1 || d > max_d) throw InvalidArgument("d must lie in [1, N-1]");
      const auto start = Clock::now();
      r.emb = optimize_layout(graph, scale_to_spread(modes.leftCols(d)), options);
      r.fit = fit_oracle(r.emb, ds.chart.Q, params.ridge);
      r.row = metrics_row(Method::umap, d, r.fit, elapsed_ms(start));
    } catch (const std::exception& e) {
      r.row = failed_row(Method::umap, d, e.what());
    }
  });
  for (auto& r : results) {
    table.rows.push_back(r.row);
    if (r.row.ok() && params.observer) params.observer(r.row, r.emb, r.fit);
  }
}

}  // namespace

ScanTable run_scan(const Dataset& ds, std::span<const Index> dims, std::span<const Method> methods,
                   const ScanParams& params) {
  if (dims.empty()) throw InvalidArgument("run_scan: empty dimension list");
  for (Index d : dims)
    if (d < 1) throw InvalidArgument("run_scan: dimensions must be >= 1");
  if (ds.chart.Q.rows() != ds.size()) throw InvalidArgument("run_scan: dataset chart/ambient mismatch");

  ScanTable table;
  for (Method m : methods) {
    switch (m) {
      case Method::dmap: scan_dmap(ds, dims, params, table); break;
      case Method::isomap: scan_isomap(ds, dims, params, table); break;
      case Method::umap: scan_umap(ds, dims, params, table); break;
    }
  }
  return table;
}

}  // namespace chartbench
