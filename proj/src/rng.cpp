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

#include "dris/rng.hpp"

#include <cmath>
#include <numbers>

namespace dris {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

Philox4x32::Key RngStream::key() const {
  // mix64 is a bijection, so for a fixed seed distinct stream ids give
  // distinct keys.
  const std::uint64_t k = mix64(seed) ^ mix64(stream_id + 0x632BE59BD9B4E019ULL);
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::uint64_t derive_stream_id(std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) {
  std::uint64_t h = mix64(a + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ (b + 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ (c + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

SampleRng::SampleRng(const RngStream& stream, std::uint64_t sample_index)
    : key_(stream.key()), sample_index_(sample_index) {}

void SampleRng::refill() {
  const Philox4x32::Counter out = Philox4x32::generate(
      {block_++, 0u, static_cast<std::uint32_t>(sample_index_),
       static_cast<std::uint32_t>(sample_index_ >> 32)},
      key_);
  buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
  buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
  buffered_ = 2;
}

double SampleRng::uniform() {
  if (buffered_ == 0) refill();
  const std::uint64_t bits = buffer_[2 - buffered_--];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double SampleRng::exponential() { return -std::log1p(-uniform()); }

double SampleRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log1p(-uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace dris
