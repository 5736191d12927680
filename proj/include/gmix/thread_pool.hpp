#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gmix {

// Runs fn(begin, end) over [0, count) split into fixed-size chunks. Chunk
// boundaries depend only on (count, chunk), never on the thread count, so a
// caller that writes into per-index slots and reduces sequentially gets the
// same answer for any --threads value. With threads <= 1 everything runs on
// the caller's thread.
inline void parallel_chunks(
    int threads, std::size_t count, std::size_t chunk,
    const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (chunk == 0) chunk = 1;
  const std::size_t n_chunks = (count + chunk - 1) / chunk;

  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t begin = c * chunk;
      fn(begin, std::min(count, begin + chunk));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t begin = c * chunk;
      try {
        fn(begin, std::min(count, begin + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gmix
