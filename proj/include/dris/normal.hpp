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

// Standard normal helpers shared by the sampler, the oracles and the
// bound checks.

namespace dris {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x);
double normal_cdf(double x);

// Upper tail 1 - Phi(x), computed through erfc so it stays accurate far in
// the tail.
double normal_tail(double x);

// Inverse of normal_tail: returns x with normal_tail(x) = q, q in (0, 1).
double normal_tail_inverse(double q);

}  // namespace dris
