#include "fepca/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fepca {

namespace {

int env_or_hardware() {
  if (const char* env = std::getenv("FEPCA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::atomic<int> g_worker_count{0};  // 0 = not yet resolved

// Threads beyond the caller that the whole process may still spawn;
// nested parallel_for calls shrink it so the budget is global, not
// per-call-site.
std::atomic<int> g_spare_workers{-1};
std::mutex g_budget_mutex;

int resolve_worker_count() {
  int v = g_worker_count.load(std::memory_order_acquire);
  if (v == 0) {
    v = env_or_hardware();
    g_worker_count.store(v, std::memory_order_release);
    g_spare_workers.store(v - 1, std::memory_order_release);
  }
  return v;
}

int claim_spares(int wanted) {
  std::lock_guard<std::mutex> lock(g_budget_mutex);
  int available = g_spare_workers.load(std::memory_order_relaxed);
  const int got = std::min(wanted, std::max(available, 0));
  g_spare_workers.store(available - got, std::memory_order_relaxed);
  return got;
}

void release_spares(int count) {
  std::lock_guard<std::mutex> lock(g_budget_mutex);
  g_spare_workers.fetch_add(count, std::memory_order_relaxed);
}

}  // namespace

void set_worker_count(int n) {
  const int v = n > 0 ? n : env_or_hardware();
  g_worker_count.store(v, std::memory_order_release);
  g_spare_workers.store(v - 1, std::memory_order_release);
}

int worker_count() {
  return resolve_worker_count();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  resolve_worker_count();

  const int extra = count > 1 ? claim_spares(static_cast<int>(std::min<std::size_t>(
                                    count - 1, static_cast<std::size_t>(worker_count() - 1))))
                              : 0;

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) break;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(extra));
  for (int t = 0; t < extra; ++t) workers.emplace_back(drain);
  drain();
  for (auto& w : workers) w.join();
  if (extra > 0) release_spares(extra);

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fepca
