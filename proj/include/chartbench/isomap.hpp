#pragma once

// Isomap: symmetric kNN graph, all-pairs Dijkstra geodesics, classical MDS.

#include <tuple>
#include <vector>

#include "chartbench/types.hpp"

namespace chartbench {

struct Edge {
  Index target;
  double weight;
};

struct NeighborGraph {
  std::vector<std::vector<Edge>> adjacency;  // sorted by target
  int k = 0;
  bool symmetrized = false;

  Index size() const { return static_cast<Index>(adjacency.size()); }
  Index num_edges() const;  // undirected edge count once symmetrized
  double max_edge() const;
};

/// Each node joined to its k nearest Euclidean neighbors (ties by lower index),
/// then symmetrized by union. Rejects duplicate points and k outside [1, N).
NeighborGraph knn_graph(const MatrixXd& X, int k);

/// Builds a symmetric graph from an explicit undirected edge list.
NeighborGraph graph_from_edges(Index n, const std::vector<std::tuple<Index, Index, double>>& edges);

/// Number of connected components.
int count_components(const NeighborGraph& g);

struct GeodesicMatrix {
  MatrixXd G;
};

/// Exact single-source Dijkstra from every node (sources run through parallel_for).
/// Throws DisconnectedGraph instead of returning infinite distances.
GeodesicMatrix geodesics(const NeighborGraph& g);

struct MdsResult {
  Embedding embedding;
  VectorXd eigenvalues;    // top-d eigenvalues of the double-centered Gram matrix
  int clamped_modes = 0;   // eigenvalues <= 0 whose coordinates were zeroed
};

/// Classical MDS on a distance matrix: B = -1/2 J (G o G) J, coordinates
/// v_n * sqrt(max(lambda_n, 0)) for the top-d eigenpairs.
MdsResult classical_mds(const MatrixXd& G, Index d);

}  // namespace chartbench
