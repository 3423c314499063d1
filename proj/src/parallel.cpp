#include "chartbench/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "chartbench/errors.hpp"

namespace chartbench {

namespace {
std::atomic<int> g_threads{1};
}

int num_threads() { return g_threads.load(); }

void set_num_threads(int n) {
  if (n < 1) throw InvalidArgument("thread count must be >= 1");
  g_threads.store(n);
}

void parallel_for(Index n, const std::function<void(Index)>& body) {
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<Index>(num_threads(), n));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto work = [&] {
    for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace chartbench
