#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace ppcate {

// Runs fn(task) for task = 0..count-1 on up to `threads` workers pulling from
// a shared counter. Each task must write only to its own output slot, which
// makes results independent of scheduling. The first exception (by lowest
// task index) is rethrown after all workers drain.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (count <= 0) return;
  if (threads < 1) threads = 1;
  const int workers = std::min(threads, count);
  if (workers == 1) {
    for (int task = 0; task < count; ++task) fn(task);
    return;
  }

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<bool> failed{false};

  auto body = [&]() {
    for (;;) {
      const int task = next.fetch_add(1);
      if (task >= count) return;
      if (failed.load(std::memory_order_relaxed)) continue;  // drain fast
      try {
        fn(task);
      } catch (...) {
        errors[static_cast<std::size_t>(task)] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();

  if (failed.load())
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
}

}  // namespace ppcate
