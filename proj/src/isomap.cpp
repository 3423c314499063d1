#include "chartbench/isomap.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "chartbench/errors.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/parallel.hpp"

namespace chartbench {

Index NeighborGraph::num_edges() const {
  Index total = 0;
  for (const auto& row : adjacency) total += static_cast<Index>(row.size());
  return symmetrized ? total / 2 : total;
}

double NeighborGraph::max_edge() const {
  double m = 0.0;
  for (const auto& row : adjacency)
    for (const auto& e : row) m = std::max(m, e.weight);
  return m;
}

namespace {

void insert_edge(std::vector<Edge>& row, Index target, double weight) {
  auto it = std::lower_bound(row.begin(), row.end(), target,
                             [](const Edge& e, Index t) { return e.target < t; });
  if (it != row.end() && it->target == target) return;
  row.insert(it, Edge{target, weight});
}

}  // namespace

NeighborGraph knn_graph(const MatrixXd& X, int k) {
  const Index n = X.rows();
  if (k < 1 || k >= n) throw InvalidArgument("knn_graph: k must lie in [1, N)");

  std::vector<std::vector<std::pair<double, Index>>> nearest(static_cast<std::size_t>(n));
  parallel_for(n, [&](Index i) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j)
      if (j != i) cand.emplace_back((X.row(i) - X.row(j)).norm(), j);
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    cand.resize(static_cast<std::size_t>(k));
    nearest[static_cast<std::size_t>(i)] = std::move(cand);
  });

  NeighborGraph g;
  g.k = k;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (const auto& [dist, j] : nearest[static_cast<std::size_t>(i)]) {
      if (!(dist > 0))
        throw InvalidArgument("knn_graph: duplicate points at rows " + std::to_string(i) + " and " +
                              std::to_string(j));
      insert_edge(g.adjacency[static_cast<std::size_t>(i)], j, dist);
      insert_edge(g.adjacency[static_cast<std::size_t>(j)], i, dist);
    }
  }
  g.symmetrized = true;
  return g;
}

NeighborGraph graph_from_edges(Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
  NeighborGraph g;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (const auto& [i, j, w] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw InvalidArgument("graph_from_edges: bad edge endpoints");
    if (!(w > 0)) throw InvalidArgument("graph_from_edges: weights must be positive");
    insert_edge(g.adjacency[static_cast<std::size_t>(i)], j, w);
    insert_edge(g.adjacency[static_cast<std::size_t>(j)], i, w);
  }
  g.symmetrized = true;
  return g;
}

int count_components(const NeighborGraph& g) {
  const Index n = g.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  int components = 0;
  for (Index start = 0; start < n; ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) continue;
    label[static_cast<std::size_t>(start)] = components;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& e : g.adjacency[static_cast<std::size_t>(u)]) {
        auto& l = label[static_cast<std::size_t>(e.target)];
        if (l < 0) {
          l = components;
          stack.push_back(e.target);
        }
      }
    }
    ++components;
  }
  return components;
}

GeodesicMatrix geodesics(const NeighborGraph& g) {
  const Index n = g.size();
  if (n == 0) throw InvalidArgument("geodesics: empty graph");
  const int components = count_components(g);
  if (components > 1) throw DisconnectedGraph(components);

  GeodesicMatrix out;
  out.G.resize(n, n);
  using Item = std::pair<double, Index>;
  parallel_for(n, [&](Index source) {
    std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(source)] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& e : g.adjacency[static_cast<std::size_t>(u)]) {
        const double alt = du + e.weight;
        double& dv = dist[static_cast<std::size_t>(e.target)];
        if (alt < dv) {
          dv = alt;
          heap.emplace(alt, e.target);
        }
      }
    }
    // Column-major storage: write the source's distances into its column.
    out.G.col(source) = Eigen::Map<const VectorXd>(dist.data(), n);
  });
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = std::min(out.G(i, j), out.G(j, i));
      out.G(i, j) = v;
      out.G(j, i) = v;
    }
  return out;
}

MdsResult classical_mds(const MatrixXd& G, Index d) {
  const Index n = G.rows();
  if (G.cols() != n) throw InvalidArgument("classical_mds: distance matrix must be square");
  if (d < 1 || d > n - 1) throw InvalidArgument("classical_mds: d must lie in [1, N-1]");

  // -1/2 J (G o G) J without forming J.
  MatrixXd B = G.array().square().matrix();
  const VectorXd row_mean = B.rowwise().mean();
  const VectorXd col_mean = B.colwise().mean().transpose();
  const double grand = B.mean();
  B.colwise() -= row_mean;
  B.rowwise() -= col_mean.transpose();
  B.array() += grand;
  B *= -0.5;
  B = 0.5 * (B + B.transpose()).eval();

  const SymSpectrum<double> spec = sym_eig(B, d);
  MdsResult out;
  out.eigenvalues = spec.values;
  out.embedding.method = Method::isomap;
  out.embedding.U.resize(n, d);
  for (Index c = 0; c < d; ++c) {
    const double l = spec.values(c);
    if (l > 0) {
      out.embedding.U.col(c) = spec.vectors.col(c) * std::sqrt(l);
    } else {
      out.embedding.U.col(c).setZero();
      ++out.clamped_modes;
    }
  }
  out.embedding.meta["clamped_modes"] = std::to_string(out.clamped_modes);
  return out;
}

}  // namespace chartbench
