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

#include <vector>

#include "dris/geometry.hpp"

// Deterministic ground truth for low-dimensional targets.
namespace dris::oracle {

// h(u) = int_0^u t^2 phi(r - t) dt for E = {x >= r} in one dimension.
double quad_h_1d(double r, double u);
// p(u) = 1 - Phi(r - u).
double quad_p_1d(double r, double u);
// u with quad_h_1d(r, u) = delta^2; throws DomainError if none in (0, r].
double root_1d(double r, double delta);

struct Quad2d {
  double h = 0.0;
  double p = 0.0;
};

// h(u) and p(u) of a two-dimensional target under N(0, I_2), integrated over
// the box [-10, 10]^2. Outer integral over x_2; along each line x_2 = const
// the inflated set is an interval located by bisection on the (convex)
// distance, its nominal mass is taken from erfc and the d^2 integrand is
// integrated by adaptive Gauss-Kronrod.
Quad2d quad_2d(const ConvexTarget& set, double u);
// u with quad_2d(set, u).h = delta^2, searched in (0, |x*|).
double root_2d(const ConvexTarget& set, double delta);

struct BoundEntry {
  double r = 0.0;
  double u = 0.0;
  double p = 0.0;
  // r - u_r and its upper bound invtail(delta^2 / r^2).
  double gap = 0.0;
  double gap_bound = 0.0;
  bool gap_ok = false;
  // r^2 p_r against delta^2 (1 - tolerance).
  double scaled_p = 0.0;
  bool scaled_p_ok = false;
};

struct BoundReport {
  std::vector<BoundEntry> entries;
  bool all_ok() const;
};

struct BoundInput {
  double r = 0.0;
  double u = 0.0;
  double p = 0.0;
};

// Checks r - u_r < invtail(delta^2 / r^2) and r^2 p_r >= delta^2 (1 - tolerance)
// for each input. `r` is the distance from the origin to the target.
BoundReport check_bounds(const std::vector<BoundInput>& inputs, double delta,
                         double tolerance = 0.0);

}  // namespace dris::oracle
