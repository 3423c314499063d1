#pragma once

#include <functional>

#include "chartbench/types.hpp"

namespace chartbench {

/// Worker count used by parallel_for. Defaults to 1.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [0, n) on up to num_threads() workers. Each index is
/// processed exactly once; callers write results to disjoint slots so the output
/// does not depend on scheduling. The first exception (lowest index) is rethrown.
void parallel_for(Index n, const std::function<void(Index)>& body);

}  // namespace chartbench
