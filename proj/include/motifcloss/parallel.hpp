#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace motifcloss {

// Resolves a requested worker count: 0 means "ask the environment", i.e. the
// MOTIF_CLOSS_THREADS variable if set, else the hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MOTIF_CLOSS_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk) for every chunk in [0, num_chunks) on up to `threads`
// workers.  Chunks are claimed through an atomic counter, so *which* thread
// runs a chunk is nondeterministic -- callers must write results into
// per-chunk slots and fold them in chunk order afterwards.  The first
// exception thrown by any chunk is rethrown on the calling thread.
inline void parallel_chunks(std::size_t num_chunks, int threads,
                            const std::function<void(std::size_t)>& fn) {
  if (num_chunks == 0) return;
  std::size_t workers = static_cast<std::size_t>(threads < 1 ? 1 : threads);
  if (workers > num_chunks) workers = num_chunks;
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) fn(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace motifcloss
