#include "degentaxis/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <atomic>
#include <memory>
#include <mutex>

namespace degentaxis {
namespace {

std::atomic<int> g_threads{1};
std::mutex g_arena_mutex;
std::unique_ptr<tbb::global_control> g_limit;
std::unique_ptr<tbb::task_arena> g_arena;
int g_arena_threads = 0;

tbb::task_arena& arena(int threads) {
  std::lock_guard lock(g_arena_mutex);
  if (!g_arena || g_arena_threads != threads) {
    // Requests beyond the hardware concurrency are honored (oversubscribed).
    g_arena.reset();
    g_limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, threads);
    g_arena = std::make_unique<tbb::task_arena>(threads);
    g_arena_threads = threads;
  }
  return *g_arena;
}

}  // namespace

void set_thread_count(int threads) { g_threads = std::max(1, threads); }

int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  const int threads = thread_count();
  if (threads <= 1 || n <= min_chunk) {
    body(0, n);
    return;
  }
  const std::size_t grain = std::max<std::size_t>(min_chunk, n / (4 * static_cast<std::size_t>(threads)));
  arena(threads).execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain),
                      [&](const tbb::blocked_range<std::size_t>& r) { body(r.begin(), r.end()); },
                      tbb::simple_partitioner());
  });
}

}  // namespace degentaxis
