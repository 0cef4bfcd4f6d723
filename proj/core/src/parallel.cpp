#include "loopeq/parallel.hpp"

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace loopeq {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  int workers = threads < 1 ? 1 : (threads > n ? n : threads);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace loopeq
