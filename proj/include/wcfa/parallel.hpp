// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_PARALLEL_HPP_
#define WCFA_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace wcfa {

enum class Execution { serial, parallel };

/// Evaluates `f(i)` for i in [0, n) and returns results by index.
///
/// With Execution::parallel the loop runs under OpenMP; every result lands in
/// its own slot, so any downstream reduction over the returned vector is
/// independent of thread count and schedule. The first exception thrown by
/// any iteration is rethrown on the calling thread.
template <class T, class F>
std::vector<T> indexed_map(std::size_t n, Execution exec, F&& f) {
  std::vector<T> out(n);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::exception_ptr failure = nullptr;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wcfa_indexed_map_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Same as indexed_map for side-effecting bodies that write their own slots.
template <class F>
void indexed_for(std::size_t n, Execution exec, F&& f) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure = nullptr;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wcfa_indexed_for_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wcfa

#endif  // WCFA_PARALLEL_HPP_
