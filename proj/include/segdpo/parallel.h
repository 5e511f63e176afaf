// Copyright 2026 The segdpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEGDPO_PARALLEL_H_
#define SEGDPO_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace segdpo {

// Runs fn(i) for i in [0, n) on up to jobs threads. Work is handed out by an
// atomic counter, so callers that write results by index get the same output
// for any job count. The first exception (lowest index) is rethrown.
inline void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex mu;
  size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Sum of values in a fixed pairwise tree order, independent of how they were
// produced.
inline double PairwiseSum(const double* x, size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return x[0];
  const size_t h = n / 2;
  return PairwiseSum(x, h) + PairwiseSum(x + h, n - h);
}

}  // namespace segdpo

#endif  // SEGDPO_PARALLEL_H_
