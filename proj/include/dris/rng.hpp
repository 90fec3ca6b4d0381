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

#include <array>
#include <cstdint>

namespace dris {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). A pure
// function of (counter, key); there is no mutable engine state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

// Identifies one reproducible random stream. Distinct stream ids under the
// same seed map to distinct Philox keys.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  Philox4x32::Key key() const;
};

// Derives a stream id from a small tuple of integers (method, r index,
// replication, ...). Stable across platforms.
std::uint64_t derive_stream_id(std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0);

// Variate source for a single sample index inside a stream. Every sample of
// a batch owns its own counter range, so a batch is reproduced bit-for-bit
// no matter how it is split across workers.
class SampleRng {
 public:
  SampleRng(const RngStream& stream, std::uint64_t sample_index);

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Standard exponential.
  double exponential();
  // Standard normal (Box-Muller, second variate cached).
  double normal();

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t sample_index_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dris
