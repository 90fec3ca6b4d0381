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
#include <string_view>

#include "dris/geometry.hpp"
#include "dris/rng.hpp"
#include "dris/sampler.hpp"

namespace dris {

enum class MethodKind { kDris, kCrudeMc, kExpTwist };

std::string_view to_string(MethodKind method);
// Accepts "DRIS", "MC" and "ET" (case-insensitive). Throws ConfigError.
MethodKind parse_method(std::string_view name);
Proposal proposal_for(MethodKind method);

struct RootBracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct RootOptions {
  // Bisection stops once the bracket is narrower than rel_tol * x1*.
  double rel_tol = 1e-9;
  int max_iterations = 200;
  // Geometric scan points between the initial bracket ends, used to locate
  // the leftmost crossing before bisecting.
  int scan_points = 16;
  double lo_fraction = 1e-6;
  double hi_fraction = 0.999;
};

struct RootResult {
  double u = 0.0;
  // Final bracket with h(lo) <= target < h(hi).
  RootBracket bracket;
  double h_lo = 0.0;
  double h_hi = 0.0;
  int iterations = 0;
  int evaluations = 0;

  // Size of the step of h across the final bracket.
  double jump() const { return h_hi - h_lo; }
};

// inf{u : h(u) > target} for a general (possibly discontinuous, locally
// non-monotone) h. Scans a geometric grid for the first point above the
// target, then bisects down to width tol_u. Throws BracketingError when
// h(lo) already exceeds the target or no scan point does.
RootResult find_crossing(const std::function<double(double)>& h, double target,
                         RootBracket bracket, double tol_u, const RootOptions& options = {});

RootBracket default_bracket(double x1_star, const RootOptions& options = {});

// default_bracket with the lower end raised to the largest u where
// u^2 * P0(X1 >= x1* - u) <= delta^2; the population h cannot cross there.
RootBracket tail_bracket(double x1_star, double delta, const RootOptions& options = {});

// h_N(u) and p_N(u) on a fixed batch.
double empirical_h(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                   const ConvexTarget& set,
                   Proposal proposal = Proposal::kShiftedExponential);
double empirical_p(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                   const ConvexTarget& set,
                   Proposal proposal = Proposal::kShiftedExponential);

// Solves h_N(u) = delta^2 on the shared batch.
RootResult find_root(const SampleBatch& batch, double delta, RootBracket bracket,
                     const CanonicalFrame& frame, const ConvexTarget& set,
                     Proposal proposal = Proposal::kShiftedExponential,
                     const RootOptions& options = {});

// Unbiased sample variance of P(z_i, u) - H(z_i, u) / u^2, the asymptotic
// variance of p_N(u_N) once the root is estimated on the same batch.
double estimate_asymptotic_variance(const KernelValues& kernels, double u_hat);

struct DrisResult {
  MethodKind method = MethodKind::kDris;
  double u_hat = 0.0;
  double p_hat = 0.0;
  double asym_var = 0.0;
  // 95% half-widths. The u interval uses the delta method with a
  // finite-difference slope of h_N on the shared batch.
  double ci_halfwidth = 0.0;
  double u_ci_halfwidth = 0.0;
  std::size_t n_samples = 0;
  int root_iterations = 0;
  double wall_time = 0.0;
  double x1_star = 0.0;
  RootBracket bracket;
  double h_jump = 0.0;

  double relative_error() const { return ci_halfwidth / p_hat; }
};

struct PipelineOptions {
  RootOptions root;
  // Relative half-step of the central difference used for the u interval.
  double slope_step = 0.02;
};

DrisResult run_dris(const ConvexTarget& set, double delta, std::size_t n_samples,
                    const RngStream& rng, const PipelineOptions& options = {});
// Nominal sampling; the root is the exact infimum over the sorted distances.
DrisResult run_crude_mc(const ConvexTarget& set, double delta, std::size_t n_samples,
                        const RngStream& rng, const PipelineOptions& options = {});
// X_1 ~ N(x1* - u, 1), one stored standard-normal batch shifted per u.
DrisResult run_exp_twist(const ConvexTarget& set, double delta, std::size_t n_samples,
                         const RngStream& rng, const PipelineOptions& options = {});

DrisResult run_method(MethodKind method, const ConvexTarget& set, double delta,
                      std::size_t n_samples, const RngStream& rng,
                      const PipelineOptions& options = {});

}  // namespace dris
