#include "nvdnp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace nvdnp {

namespace {
int g_threads = 1;
constexpr std::size_t kChunks = 64;
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

std::size_t chunk_count(std::size_t n) { return std::min<std::size_t>(kChunks, std::max<std::size_t>(n, 1)); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t chunks = chunk_count(n);
  const std::size_t per = (n + chunks - 1) / chunks;

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * per;
    const std::size_t end = std::min(n, begin + per);
    if (begin < end) fn(begin, end, c);
  };

  const int workers = std::min<int>(g_threads, static_cast<int>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) run_chunk(c);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nvdnp
