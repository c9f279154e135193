// Copyright 2026 The metaprior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METAPRIOR_WORKER_POOL_HPP_
#define METAPRIOR_WORKER_POOL_HPP_

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace metaprior {

// Runs fn(0..n-1) on at most max_workers threads (0 -> hardware
// concurrency). Jobs must be independent; write results into pre-sized
// slots indexed by job id so aggregation stays deterministic. The first
// exception thrown by any job is rethrown after all threads join.
inline void parallel_for(std::size_t n, std::size_t max_workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = max_workers == 0
                            ? std::max<std::size_t>(
                                  1, std::thread::hardware_concurrency())
                            : max_workers;
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace metaprior

#endif  // METAPRIOR_WORKER_POOL_HPP_
