// Copyright 2026 The DRIS Authors
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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dris {

// Samples per work chunk. Chunk boundaries and the order in which chunk
// partial sums are combined are fixed, so reductions are bit-identical for
// any worker count.
inline constexpr std::size_t kChunkSize = 8192;

// Worker count from the DRIS_WORKERS environment variable, falling back to
// std::thread::hardware_concurrency().
std::size_t worker_count();

// Overrides worker_count() for the current process (0 restores the
// environment default). Used by tests that check worker invariance.
void set_worker_count(std::size_t workers);

// Calls body(chunk, begin, end) for every chunk of [0, n_items). Chunks are
// distributed over worker_count() threads; body must only write to
// chunk-private state.
void for_each_chunk(
    std::size_t n_items,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n_items) {
  return (n_items + kChunkSize - 1) / kChunkSize;
}

// Pairwise summation in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace dris
