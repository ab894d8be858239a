#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace syrlab {

/// Runs body(i) for every i in [0, count) on up to `threads` workers. Work
/// items are handed out dynamically; callers that need deterministic output
/// write into slot i of a preallocated buffer and reduce in index order.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Monte-Carlo runs are cut into fixed-size blocks; block b always draws from
/// substream b, so results do not depend on the worker count.
inline constexpr std::uint64_t kSamplesPerBlock = 4096;

inline std::size_t block_count(std::uint64_t samples) {
  return static_cast<std::size_t>((samples + kSamplesPerBlock - 1) / kSamplesPerBlock);
}

inline std::uint64_t block_size(std::uint64_t samples, std::size_t block) {
  const std::uint64_t begin = block * kSamplesPerBlock;
  return std::min<std::uint64_t>(kSamplesPerBlock, samples - begin);
}

}  // namespace syrlab
