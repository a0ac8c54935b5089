#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace kz {

// Worker count: KZ_THREADS when set to a positive integer, else the hardware concurrency.
inline int thread_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KZ_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

// Evaluates f(0..count-1) on a pool of threads. Results are stored by index, so
// the output does not depend on scheduling; the exception from the lowest failing
// index is rethrown.
template <class F>
auto parallel_map(int count, F&& f, int threads = 0) {
  using R = decltype(f(0));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errs(count);
  int workers = std::min(thread_count(threads), std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace kz
