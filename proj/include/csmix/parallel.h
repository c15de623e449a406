// Copyright 2026 The csmix Authors.
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

#ifndef CSMIX_PARALLEL_H_
#define CSMIX_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace csmix {

// Runs fn(i) for every i in [0, n) on up to `workers` threads. Callers write
// results into per-index slots, which keeps output independent of the worker
// count. The first exception thrown by any task is rethrown here.
inline void ParallelFor(size_t n, int workers,
                        const std::function<void(size_t)>& fn) {
  const size_t threads =
      std::min<size_t>(n, static_cast<size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      // Static striding; each index is owned by exactly one thread.
      for (size_t i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Maps fn over items into an output vector of the same length.
template <typename In, typename Out>
std::vector<Out> ParallelMap(const std::vector<In>& items, int workers,
                             const std::function<Out(const In&, size_t)>& fn) {
  std::vector<Out> out(items.size());
  ParallelFor(items.size(), workers,
              [&](size_t i) { out[i] = fn(items[i], i); });
  return out;
}

// Processes [0, n) in fixed-size blocks. `compute(block, begin, end)` runs in
// parallel and returns a partial result; `merge(partial)` is called on the
// calling thread in block order. Block boundaries depend only on block_size,
// so floating-point reductions are identical for any worker count.
template <typename Partial>
void BlockReduce(size_t n, size_t block_size, int workers,
                 const std::function<Partial(size_t, size_t, size_t)>& compute,
                 const std::function<void(Partial&)>& merge) {
  if (n == 0) return;
  block_size = std::max<size_t>(block_size, 1);
  const size_t blocks = (n + block_size - 1) / block_size;
  const size_t wave = static_cast<size_t>(std::max(workers, 1)) * 4;
  for (size_t first = 0; first < blocks; first += wave) {
    const size_t count = std::min(wave, blocks - first);
    std::vector<Partial> partials(count);
    ParallelFor(count, workers, [&](size_t k) {
      const size_t b = first + k;
      const size_t begin = b * block_size;
      const size_t end = std::min(n, begin + block_size);
      partials[k] = compute(b, begin, end);
    });
    for (auto& p : partials) merge(p);
  }
}

}  // namespace csmix

#endif  // CSMIX_PARALLEL_H_
