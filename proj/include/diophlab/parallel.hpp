#pragma once

// Deterministic chunked parallelism. Work is split into a fixed number of
// contiguous chunks that depends only on the range, never on the thread count,
// and chunk results are merged in index order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace diophlab {

inline std::atomic<unsigned>& thread_cap_slot() {
  static std::atomic<unsigned> cap{0};
  return cap;
}

/// Worker cap; 0 means hardware concurrency.
inline void set_thread_cap(unsigned n) { thread_cap_slot().store(n); }
inline unsigned thread_count() {
  unsigned cap = thread_cap_slot().load();
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<ChunkRange> split_range(std::size_t begin, std::size_t end, std::size_t chunk) {
  std::vector<ChunkRange> out;
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t b = begin; b < end; b += chunk) out.push_back({b, std::min(end, b + chunk)});
  return out;
}

/// Runs fn(chunk_index, range) over all chunks; results[i] belongs to chunk i.
template <class R>
std::vector<R> parallel_chunks(const std::vector<ChunkRange>& chunks,
                               const std::function<R(std::size_t, ChunkRange)>& fn) {
  std::vector<R> results(chunks.size());
  unsigned workers = std::min<std::size_t>(thread_count(), chunks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < chunks.size(); ++i) results[i] = fn(i, chunks[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < chunks.size();) results[i] = fn(i, chunks[i]);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(chunks.size());
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace diophlab
