#pragma once

#include <cstdint>
#include <random>

#include "chartbench/synth.hpp"
#include "chartbench/types.hpp"

namespace chartbench::fixtures {

inline MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, scale);
  MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = normal(gen);
  return M;
}

inline MatrixXd random_symmetric(Index n, std::uint64_t seed) {
  const MatrixXd A = random_matrix(n, n, seed);
  return 0.5 * (A + A.transpose());
}

inline Dataset swiss_roll(Index n, std::uint64_t seed = 7) {
  return roll(sample_sheet(n, 60.0, 10.0, seed), SpiralParams{});
}

}  // namespace chartbench::fixtures
