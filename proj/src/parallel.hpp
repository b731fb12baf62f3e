#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steincover::detail {

// Replications are grouped into fixed-size blocks; workers claim blocks via
// an atomic counter, accumulate locally, and the per-block results merge in
// block order afterwards. Totals are therefore identical for every worker
// count.
constexpr std::uint64_t kBlockSize = 8192;

template <class Acc, class Fn>
std::vector<Acc> run_blocked(std::uint64_t n_rep, int workers, const Fn& fn) {
  const std::uint64_t n_blocks = (n_rep + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> accs(n_blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&]() {
    try {
      for (;;) {
        std::uint64_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        Acc acc{};
        std::uint64_t lo = b * kBlockSize;
        std::uint64_t hi = std::min(n_rep, lo + kBlockSize);
        for (std::uint64_t r = lo; r < hi; ++r) fn(r, acc);
        accs[b] = std::move(acc);
      }
    } catch (...) {
      std::lock_guard<std::mutex> guard(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  int w = std::max(1, workers);
  if (static_cast<std::uint64_t>(w) > n_blocks)
    w = static_cast<int>(n_blocks);
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return accs;
}

}  // namespace steincover::detail
