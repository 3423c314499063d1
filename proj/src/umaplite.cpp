#include "chartbench/umaplite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "chartbench/errors.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/parallel.hpp"

namespace chartbench {

namespace {

struct Calibration {
  double sigma;
  double residual;
};

double membership_sum(const std::vector<double>& dists, double rho, double sigma) {
  double total = 0.0;
  for (double d : dists) total += std::exp(-std::max(0.0, d - rho) / sigma);
  return total;
}

// Bisection on sigma; the membership sum is increasing in sigma, ranging from the
// number of neighbors tied at rho (sigma -> 0) up to k (sigma -> inf).
Calibration calibrate(const std::vector<double>& dists, double rho, double target) {
  double hi = 1.0;
  const double spread = dists.back() - rho;
  if (spread > 0) hi = spread;
  for (int i = 0; i < 200 && membership_sum(dists, rho, hi) < target; ++i) hi *= 2.0;
  double lo = 0.0;
  double sigma = 0.5 * hi;
  for (int iter = 0; iter < 64; ++iter) {
    sigma = 0.5 * (lo + hi);
    const double f = membership_sum(dists, rho, sigma);
    if (f > target)
      hi = sigma;
    else
      lo = sigma;
    if (hi - lo <= std::numeric_limits<double>::min()) break;
  }
  return {sigma, std::abs(membership_sum(dists, rho, sigma) - target)};
}

// Uniform index in [0, n) from a 64-bit draw; the same mapping on every platform.
Index draw_index(std::mt19937_64& gen, Index n) {
  return static_cast<Index>((static_cast<unsigned __int128>(gen()) * static_cast<std::uint64_t>(n)) >> 64);
}

double clip(double v) { return std::clamp(v, -4.0, 4.0); }

}  // namespace

FuzzyGraph build_fuzzy_graph(const MatrixXd& X, int k) {
  const Index n = X.rows();
  if (k < 2 || k >= n) throw InvalidArgument("build_fuzzy_graph: k must lie in [2, N)");

  FuzzyGraph g;
  g.k = k;
  g.rho.resize(n);
  g.sigma.resize(n);
  g.calibration_residual.resize(n);
  const double target = std::log2(static_cast<double>(k));

  std::vector<std::vector<std::pair<double, Index>>> nearest(static_cast<std::size_t>(n));
  parallel_for(n, [&](Index i) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j)
      if (j != i) cand.emplace_back((X.row(i) - X.row(j)).norm(), j);
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    cand.resize(static_cast<std::size_t>(k));
    if (!(cand.front().first > 0))
      throw InvalidArgument("build_fuzzy_graph: duplicate points at rows " + std::to_string(i) +
                            " and " + std::to_string(cand.front().second));
    std::vector<double> dists;
    for (const auto& c : cand) dists.push_back(c.first);
    const double rho = dists.front();
    const Calibration cal = calibrate(dists, rho, target);
    g.rho(i) = rho;
    g.sigma(i) = cal.sigma;
    g.calibration_residual(i) = cal.residual;
    nearest[static_cast<std::size_t>(i)] = std::move(cand);
  });

  // Pair the two directed memberships of every unordered pair, then combine once.
  std::map<std::pair<Index, Index>, std::pair<double, double>> pairs;
  for (Index i = 0; i < n; ++i) {
    for (const auto& [dist, j] : nearest[static_cast<std::size_t>(i)]) {
      const double w = std::exp(-std::max(0.0, dist - g.rho(i)) / g.sigma(i));
      auto& slot = pairs[{std::min(i, j), std::max(i, j)}];
      (i < j ? slot.first : slot.second) = w;
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * pairs.size());
  for (const auto& [key, ab] : pairs) {
    const double w = ab.first + ab.second - ab.first * ab.second;
    if (!(w > 0)) continue;
    triplets.emplace_back(key.first, key.second, w);
    triplets.emplace_back(key.second, key.first, w);
  }
  g.memberships.resize(n, n);
  g.memberships.setFromTriplets(triplets.begin(), triplets.end());
  return g;
}

CurveParams fit_curve_params(double spread, double min_dist) {
  if (!(spread > 0) || !(min_dist >= 0)) throw InvalidArgument("fit_curve_params: bad spread/min_dist");
  constexpr int kPoints = 300;
  VectorXd x = VectorXd::LinSpaced(kPoints, 0.0, 3.0 * spread);
  VectorXd y(kPoints);
  for (int i = 0; i < kPoints; ++i)
    y(i) = x(i) < min_dist ? 1.0 : std::exp(-(x(i) - min_dist) / spread);

  auto residuals = [&](double a, double b, VectorXd& r, Eigen::MatrixX2d* J) {
    for (int i = 0; i < kPoints; ++i) {
      const double p = x(i) > 0 ? std::pow(x(i), 2.0 * b) : 0.0;
      const double denom = 1.0 + a * p;
      r(i) = 1.0 / denom - y(i);
      if (J) {
        const double g = -1.0 / (denom * denom);
        (*J)(i, 0) = g * p;
        (*J)(i, 1) = x(i) > 0 ? g * a * p * 2.0 * std::log(x(i)) : 0.0;
      }
    }
  };

  // Levenberg-Marquardt from (1, 1).
  double a = 1.0, b = 1.0, damping = 1e-3;
  VectorXd r(kPoints), r_try(kPoints);
  Eigen::MatrixX2d J(kPoints, 2);
  residuals(a, b, r, &J);
  double cost = r.squaredNorm();
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    const Eigen::Vector2d grad = J.transpose() * r;
    Eigen::Matrix2d A = JtJ;
    A.diagonal() *= 1.0 + damping;
    const Eigen::Vector2d step = A.ldlt().solve(-grad);
    const double a_try = a + step(0), b_try = b + step(1);
    if (a_try > 0 && b_try > 0) {
      residuals(a_try, b_try, r_try, nullptr);
      const double cost_try = r_try.squaredNorm();
      if (cost_try < cost) {
        const bool converged = cost - cost_try <= 1e-15 * std::max(1.0, cost);
        a = a_try;
        b = b_try;
        cost = cost_try;
        residuals(a, b, r, &J);
        damping = std::max(damping * 0.3, 1e-12);
        if (converged) break;
        continue;
      }
    }
    damping *= 10.0;
    if (damping > 1e12) break;
  }
  return {a, b};
}

MatrixXd spectral_modes(const FuzzyGraph& g, Index d) {
  const Index n = g.size();
  if (d < 1 || d > n - 1) throw InvalidArgument("spectral_init: d must lie in [1, N-1]");
  MatrixXd W = MatrixXd(g.memberships);
  const VectorXd deg = W.rowwise().sum();
  const VectorXd inv_sqrt = deg.array().max(std::numeric_limits<double>::min()).rsqrt().matrix();
  MatrixXd A = inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal();
  A = 0.5 * (A + A.transpose()).eval();
  W.resize(0, 0);
  return sym_eig(A, d + 1).vectors.rightCols(d);
}

MatrixXd scale_to_spread(MatrixXd init) {
  const double m = init.size() > 0 ? init.cwiseAbs().maxCoeff() : 0.0;
  if (m > 0) init *= 10.0 / m;
  return init;
}

MatrixXd spectral_init(const FuzzyGraph& g, Index d) { return scale_to_spread(spectral_modes(g, d)); }

Embedding optimize_layout(const FuzzyGraph& g, MatrixXd Y, const LayoutOptions& options) {
  const Index n = g.size();
  if (Y.rows() != n || Y.cols() < 1) throw InvalidArgument("optimize_layout: init must be N x d, d >= 1");
  if (options.epochs < 1) throw InvalidArgument("optimize_layout: epochs must be >= 1");
  const CurveParams curve = options.curve.a > 0 ? options.curve : fit_curve_params();
  const double a = curve.a, b = curve.b;
  const Index d = Y.cols();

  struct DirectedEdge {
    Index head, tail;
    double epochs_per_sample;
  };
  std::vector<DirectedEdge> edges;
  double max_w = 0.0;
  for (Index c = 0; c < g.memberships.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.memberships, c); it; ++it)
      max_w = std::max(max_w, it.value());
  for (Index c = 0; c < g.memberships.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.memberships, c); it; ++it) {
      // Edges too weak to be sampled even once over the run are dropped.
      if (it.value() < max_w / options.epochs) continue;
      edges.push_back({it.row(), it.col(), max_w / it.value()});
    }

  std::vector<double> next_sample(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) next_sample[e] = edges[e].epochs_per_sample;
  std::vector<std::size_t> order(edges.size());
  std::mt19937_64 gen(options.seed);

  MatrixXd P = Y.transpose();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double step = options.initial_step * (1.0 - static_cast<double>(epoch) / options.epochs);
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(draw_index(gen, static_cast<Index>(i)))]);

    for (std::size_t e : order) {
      if (next_sample[e] > epoch + 1) continue;
      next_sample[e] += edges[e].epochs_per_sample;
      double* head = P.col(edges[e].head).data();
      double* tail = P.col(edges[e].tail).data();

      double dist2 = 0.0;
      for (Index c = 0; c < d; ++c) dist2 += (head[c] - tail[c]) * (head[c] - tail[c]);
      if (dist2 > 0) {
        const double coef = -2.0 * a * b * std::pow(dist2, b - 1.0) / (a * std::pow(dist2, b) + 1.0);
        if (std::isfinite(coef)) {
          for (Index c = 0; c < d; ++c) {
            const double gd = clip(coef * (head[c] - tail[c]));
            head[c] += gd * step;
            tail[c] -= gd * step;
          }
        }
      }

      for (int s = 0; s < options.negative_samples; ++s) {
        const Index other = draw_index(gen, n);
        if (other == edges[e].head) continue;
        const double* far = P.col(other).data();
        double nd2 = 0.0;
        for (Index c = 0; c < d; ++c) nd2 += (head[c] - far[c]) * (head[c] - far[c]);
        if (!(nd2 > 0)) continue;
        const double coef = 2.0 * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
        if (!std::isfinite(coef)) continue;
        for (Index c = 0; c < d; ++c) head[c] += clip(coef * (head[c] - far[c])) * step;
      }
    }
  }
  Y = P.transpose();

  Embedding emb;
  emb.U = std::move(Y);
  emb.method = Method::umap;
  emb.meta["k"] = std::to_string(g.k);
  emb.meta["epochs"] = std::to_string(options.epochs);
  emb.meta["seed"] = std::to_string(options.seed);
  emb.meta["variant"] = "umap-lite";
  return emb;
}

Embedding optimize_layout(const FuzzyGraph& g, Index d, int epochs, std::uint64_t seed) {
  LayoutOptions options;
  options.epochs = epochs;
  options.seed = seed;
  return optimize_layout(g, spectral_init(g, d), options);
}

}  // namespace chartbench
