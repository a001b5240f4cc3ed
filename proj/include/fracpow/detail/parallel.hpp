#ifndef FRACPOW_DETAIL_PARALLEL_HPP
#define FRACPOW_DETAIL_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "fracpow/detail/exp_sweep.hpp"

namespace fracpow::detail {

/// Inclusive k-range handled by one task.
struct KChunk {
  std::uint64_t first;
  std::uint64_t last;
};

/// Splits [first, last] at multiples of kReseedInterval. A sweep started at
/// a chunk's first k then produces the same enclosures as one long sweep.
inline std::vector<KChunk> k_chunks(std::uint64_t first, std::uint64_t last) {
  std::vector<KChunk> out;
  for (std::uint64_t k = first; k <= last && k != 0;) {
    const std::uint64_t next = (k / kReseedInterval + 1) * kReseedInterval;
    const std::uint64_t end = std::min(last, next - 1);
    out.push_back({k, end});
    if (end == last) break;
    k = end + 1;
  }
  return out;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Applies f to every item; results keep the input order. The first
/// exception in item order is rethrown.
template <class R, class T, class F>
std::vector<R> parallel_map(const std::vector<T>& items, unsigned threads, F f) {
  std::vector<std::optional<R>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        slots[i].emplace(f(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(1, items.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<R> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace fracpow::detail

#endif  // FRACPOW_DETAIL_PARALLEL_HPP
