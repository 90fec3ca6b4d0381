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

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

#include "dris/rng.hpp"

namespace dris {
namespace {

TEST_SUITE("rng") {

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same stream and index replay the same draws") {
  const RngStream stream{42, 7};
  SampleRng a(stream, 123456789);
  SampleRng b(stream, 123456789);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.exponential() == b.exponential());
  }
}

TEST_CASE("streams and sample indices are decorrelated") {
  std::set<double> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      seen.insert(SampleRng(RngStream{1, s}, i).uniform());
    }
  }
  CHECK(seen.size() == 2500);
  CHECK(derive_stream_id(1, 2, 3) != derive_stream_id(1, 3, 2));
  CHECK(derive_stream_id(0, 0, 1) != derive_stream_id(0, 1, 0));
}

TEST_CASE("uniform, exponential and normal moments") {
  const int n = 200000;
  double su = 0, se = 0, sn = 0, sn2 = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    SampleRng rng(RngStream{9, 0}, static_cast<std::uint64_t>(i));
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    se += rng.exponential();
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

}  // TEST_SUITE

}  // namespace
}  // namespace dris
