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

#include "dris/estimator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dris/error.hpp"
#include "dris/normal.hpp"
#include "dris/parallel.hpp"

namespace dris {
namespace {

constexpr double kZ95 = 1.96;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_pipeline_inputs(const ConvexTarget& set, double delta, std::size_t n_samples) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  if (n_samples < 2) throw DomainError("pipelines need at least two samples");
  if (set.contains(Vector(set.dim(), 0.0))) throw DomainError("target contains the origin");
}

// Sample variance of H(z_i, u) terms.
double h_variance(const KernelValues& kv) {
  const std::size_t n = kv.size();
  const double mean = kv.h_mean();
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = kv.h_term(i) - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

// 1.96 sd(H) / (sqrt(N) h'(u)), with h'(u) = u^2 p'(u).
double u_halfwidth(const KernelValues& kv, double u, double p_slope) {
  const double dh = u * u * p_slope;
  if (!(dh > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return kZ95 * std::sqrt(h_variance(kv) / static_cast<double>(kv.size())) / dh;
}

DrisResult run_importance(MethodKind method, const ConvexTarget& set, double delta,
                          std::size_t n_samples, const RngStream& rng,
                          const PipelineOptions& options) {
  check_pipeline_inputs(set, delta, n_samples);
  const Proposal proposal = proposal_for(method);
  const auto start = std::chrono::steady_clock::now();

  const CanonicalFrame frame = canonical_frame(set);
  const SampleBatch batch = proposal == Proposal::kShiftedExponential
                                ? draw_batch(rng, n_samples, set.dim())
                                : draw_normal_batch(rng, n_samples, set.dim());
  RootResult root;
  const RootBracket narrow = tail_bracket(frame.x1_star(), delta, options.root);
  try {
    root = find_root(batch, delta, narrow, frame, set, proposal, options.root);
  } catch (const BracketingError& e) {
    // The sample h can exceed the population bound at the narrow lower end.
    const RootBracket wide = default_bracket(frame.x1_star(), options.root);
    if (narrow.lo == wide.lo || !(e.h_lo() > delta * delta)) throw;
    root = find_root(batch, delta, wide, frame, set, proposal, options.root);
  }
  const KernelValues kv = eval_kernels(batch, root.u, frame, set, proposal);

  DrisResult result;
  result.method = method;
  result.u_hat = root.u;
  result.p_hat = kv.p_mean();
  result.asym_var = estimate_asymptotic_variance(kv, root.u);
  result.ci_halfwidth = kZ95 * std::sqrt(result.asym_var / static_cast<double>(n_samples));
  result.n_samples = n_samples;
  result.root_iterations = root.iterations;
  result.x1_star = frame.x1_star();
  result.bracket = root.bracket;
  result.h_jump = root.jump();
  result.wall_time = seconds_since(start);

  const double step = options.slope_step * root.u;
  const double u_up = std::min(root.u + step, 0.5 * (root.u + frame.x1_star()));
  const double u_down = root.u - step;
  const double slope = (empirical_p(batch, u_up, frame, set, proposal) -
                        empirical_p(batch, u_down, frame, set, proposal)) /
                       (u_up - u_down);
  result.u_ci_halfwidth = u_halfwidth(kv, root.u, slope);
  return result;
}

}  // namespace

std::string_view to_string(MethodKind method) {
  switch (method) {
    case MethodKind::kDris:
      return "DRIS";
    case MethodKind::kCrudeMc:
      return "MC";
    case MethodKind::kExpTwist:
      return "ET";
  }
  return "?";
}

MethodKind parse_method(std::string_view name) {
  std::string upper(name);
  for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (upper == "DRIS") return MethodKind::kDris;
  if (upper == "MC" || upper == "CRUDEMC") return MethodKind::kCrudeMc;
  if (upper == "ET" || upper == "EXPTWIST") return MethodKind::kExpTwist;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Proposal proposal_for(MethodKind method) {
  switch (method) {
    case MethodKind::kDris:
      return Proposal::kShiftedExponential;
    case MethodKind::kCrudeMc:
      return Proposal::kNominal;
    case MethodKind::kExpTwist:
      return Proposal::kMeanShift;
  }
  return Proposal::kNominal;
}

RootBracket default_bracket(double x1_star, const RootOptions& options) {
  return {options.lo_fraction * x1_star, options.hi_fraction * x1_star};
}

RootBracket tail_bracket(double x1_star, double delta, const RootOptions& options) {
  RootBracket out = default_bracket(x1_star, options);
  // h(u) <= u^2 P0(X1 >= x1* - u), so h stays below delta^2 wherever the
  // right side does.
  const double target = delta * delta;
  auto bound = [&](double u) { return u * u * normal_tail(x1_star - u); };
  if (!(bound(out.lo) < target) || !(bound(out.hi) > target)) return out;
  double lo = out.lo;
  double hi = out.hi;
  for (int k = 0; k < 200 && hi - lo > 1e-12 * x1_star; ++k) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) < target ? lo : hi) = mid;
  }
  out.lo = lo;
  return out;
}

RootResult find_crossing(const std::function<double(double)>& h, double target,
                         RootBracket bracket, double tol_u, const RootOptions& options) {
  if (!(bracket.lo > 0.0 && bracket.lo < bracket.hi)) {
    throw DomainError("root bracket must satisfy 0 < lo < hi");
  }
  RootResult out;
  auto eval = [&](double u) {
    ++out.evaluations;
    return h(u);
  };

  double lo = bracket.lo;
  double hi = bracket.hi;
  double h_lo = eval(lo);
  double h_hi = eval(hi);
  // Pull the upper end in while h is not finite there.
  for (int k = 0; k < 60 && !std::isfinite(h_hi); ++k) {
    hi = lo + 0.5 * (hi - lo);
    h_hi = eval(hi);
  }
  if (!std::isfinite(h_lo) || !std::isfinite(h_hi)) {
    throw BracketingError("h is not finite on the bracket", lo, h_lo, hi, h_hi);
  }
  if (h_lo > target) {
    throw BracketingError("delta^2 lies below h at the lower bracket end", lo, h_lo, hi, h_hi);
  }

  // Leftmost scan point above the target.
  const int points = std::max(options.scan_points, 1);
  const double ratio = std::pow(hi / lo, 1.0 / points);
  double prev_u = lo;
  double prev_h = h_lo;
  bool found = false;
  for (int k = 1; k <= points; ++k) {
    const double u = k == points ? hi : lo * std::pow(ratio, k);
    const double hu = k == points ? h_hi : eval(u);
    if (hu > target) {
      lo = prev_u;
      h_lo = prev_h;
      hi = u;
      h_hi = hu;
      found = true;
      break;
    }
    prev_u = u;
    prev_h = hu;
  }
  if (!found) {
    throw BracketingError("no root of h(u) = delta^2 inside the bracket", bracket.lo, h_lo, hi, h_hi);
  }

  // Illinois false position on h - target, with a bisection step whenever
  // the bracket fails to halve. The leftmost bracket is kept throughout.
  int stale_side = 0;
  double width_before = hi - lo;
  bool force_bisect = false;
  while (hi - lo > tol_u && out.iterations < options.max_iterations) {
    double mid = 0.5 * (lo + hi);
    if (!force_bisect) {
      double f_lo = h_lo - target;
      double f_hi = h_hi - target;
      if (stale_side < -1) f_lo *= 0.5;
      if (stale_side > 1) f_hi *= 0.5;
      const double guess = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      // Stay strictly inside and away from the ends by a sliver of tol_u.
      const double guard = 0.25 * tol_u;
      if (std::isfinite(guess)) mid = std::clamp(guess, lo + guard, hi - guard);
    }
    if (mid <= lo || mid >= hi) break;
    const double hm = eval(mid);
    ++out.iterations;
    if (hm > target) {
      hi = mid;
      h_hi = hm;
      stale_side = stale_side < 0 ? stale_side - 1 : -1;
    } else {
      lo = mid;
      h_lo = hm;
      stale_side = stale_side > 0 ? stale_side + 1 : 1;
    }
    if (out.iterations % 2 == 0) {
      force_bisect = hi - lo > 0.5 * width_before;
      width_before = hi - lo;
    } else {
      force_bisect = false;
    }
  }
  out.u = hi;
  out.bracket = {lo, hi};
  out.h_lo = h_lo;
  out.h_hi = h_hi;
  return out;
}

double empirical_h(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                   const ConvexTarget& set, Proposal proposal) {
  return kernel_means(batch, u, frame, set, proposal).h;
}

double empirical_p(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                   const ConvexTarget& set, Proposal proposal) {
  return kernel_means(batch, u, frame, set, proposal).p;
}

RootResult find_root(const SampleBatch& batch, double delta, RootBracket bracket,
                     const CanonicalFrame& frame, const ConvexTarget& set, Proposal proposal,
                     const RootOptions& options) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(bracket.hi < frame.x1_star()) && proposal == Proposal::kShiftedExponential) {
    throw DomainError("root bracket must lie inside (0, x1*)");
  }
  return find_crossing(
      [&](double u) { return empirical_h(batch, u, frame, set, proposal); }, delta * delta,
      bracket, options.rel_tol * frame.x1_star(), options);
}

double estimate_asymptotic_variance(const KernelValues& kernels, double u_hat) {
  if (!(u_hat > 0.0)) throw DomainError("asymptotic variance needs u_hat > 0");
  const std::size_t n = kernels.size();
  if (n < 2) throw DomainError("asymptotic variance needs at least two samples");
  const double inv_u2 = 1.0 / (u_hat * u_hat);
  auto term = [&](std::size_t i) { return kernels.p_term(i) - kernels.h_term(i) * inv_u2; };

  std::vector<double> partial(chunk_count(n), 0.0);
  auto chunked = [&](auto&& f) {
    for (std::size_t c = 0; c < partial.size(); ++c) {
      const std::size_t begin = c * kChunkSize;
      const std::size_t end = std::min(n, begin + kChunkSize);
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += f(i);
      partial[c] = s;
    }
    return pairwise_sum(partial);
  };
  const double mean = chunked(term) / static_cast<double>(n);
  const double ss = chunked([&](std::size_t i) {
    const double d = term(i) - mean;
    return d * d;
  });
  return ss / static_cast<double>(n - 1);
}

DrisResult run_dris(const ConvexTarget& set, double delta, std::size_t n_samples,
                    const RngStream& rng, const PipelineOptions& options) {
  return run_importance(MethodKind::kDris, set, delta, n_samples, rng, options);
}

DrisResult run_exp_twist(const ConvexTarget& set, double delta, std::size_t n_samples,
                         const RngStream& rng, const PipelineOptions& options) {
  return run_importance(MethodKind::kExpTwist, set, delta, n_samples, rng, options);
}

DrisResult run_crude_mc(const ConvexTarget& set, double delta, std::size_t n_samples,
                        const RngStream& rng, const PipelineOptions& options) {
  check_pipeline_inputs(set, delta, n_samples);
  const auto start = std::chrono::steady_clock::now();

  const CanonicalFrame frame = canonical_frame(set);
  const SampleBatch batch = draw_normal_batch(rng, n_samples, set.dim());
  // Under the nominal law distances do not depend on u: compute them once.
  KernelValues kv;
  kv.dist.resize(n_samples);
  kv.lik.assign(n_samples, 1.0);
  kv.indicator.resize(n_samples);
  for_each_chunk(n_samples, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) kv.dist[i] = distance(set, batch.row(i));
  });

  std::vector<double> sorted = kv.dist;
  std::sort(sorted.begin(), sorted.end());
  const double target = delta * delta * static_cast<double>(n_samples);
  double cumulative = 0.0;
  std::size_t k = 0;
  for (; k < n_samples; ++k) {
    cumulative += sorted[k] * sorted[k];
    if (cumulative > target) break;
  }
  if (k == n_samples) {
    throw BracketingError("crude MC: no sample pushes h_N above delta^2", sorted.front(),
                          0.0, sorted.back(), cumulative / static_cast<double>(n_samples));
  }
  const double u_hat = sorted[k];
  if (!(u_hat > 0.0)) throw BracketingError("crude MC: root at u = 0", 0.0, 0.0, 0.0, 0.0);
  kv.u = u_hat;
  for (std::size_t i = 0; i < n_samples; ++i) kv.indicator[i] = kv.dist[i] <= u_hat ? 1 : 0;

  DrisResult result;
  result.method = MethodKind::kCrudeMc;
  result.u_hat = u_hat;
  result.p_hat = kv.p_mean();
  result.asym_var = estimate_asymptotic_variance(kv, u_hat);
  result.ci_halfwidth = kZ95 * std::sqrt(result.asym_var / static_cast<double>(n_samples));
  result.n_samples = n_samples;
  result.x1_star = frame.x1_star();
  result.bracket = {k > 0 ? sorted[k - 1] : 0.0, u_hat};
  result.h_jump = u_hat * u_hat / static_cast<double>(n_samples);
  result.wall_time = seconds_since(start);

  auto count_below = [&](double u) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), u) -
                               sorted.begin()) /
           static_cast<double>(n_samples);
  };
  const double step = options.slope_step * u_hat;
  const double slope =
      (count_below(u_hat + step) - count_below(u_hat - step)) / (2.0 * step);
  result.u_ci_halfwidth = u_halfwidth(kv, u_hat, slope);
  return result;
}

DrisResult run_method(MethodKind method, const ConvexTarget& set, double delta,
                      std::size_t n_samples, const RngStream& rng,
                      const PipelineOptions& options) {
  switch (method) {
    case MethodKind::kDris:
      return run_dris(set, delta, n_samples, rng, options);
    case MethodKind::kCrudeMc:
      return run_crude_mc(set, delta, n_samples, rng, options);
    case MethodKind::kExpTwist:
      return run_exp_twist(set, delta, n_samples, rng, options);
  }
  throw DomainError("unknown method");
}

}  // namespace dris
