#include "lipsmooth/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace lipsmooth {

int worker_count() {
  static int cached = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("LIPSMOOTH_THREADS")) {
      int cap = std::atoi(env);
      if (cap > 0) hw = std::min(hw, cap);
    }
    return hw;
  }();
  return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  int workers = worker_count();
  if (workers <= 1 || n < 128) {
    body(0, n);
    return;
  }
  // Chunk size depends on n only; threads pull chunks from a shared counter.
  std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(workers) * 8, n);
  std::size_t chunk_size = (n + chunks - 1) / chunks;
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      std::size_t begin = c * chunk_size;
      if (begin >= n) break;
      body(begin, std::min(begin + chunk_size, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace lipsmooth
