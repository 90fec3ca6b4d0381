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

#include "dris/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "dris/error.hpp"
#include "dris/normal.hpp"

namespace dris::oracle {
namespace {

constexpr double kBox = 10.0;
constexpr double kInnerTol = 1e-12;
constexpr double kOuterTol = 1e-11;
constexpr unsigned kMaxDepth = 18;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

// One 31-point Kronrod rule with its embedded error estimate.
template <typename F>
double kronrod(F& f, double a, double b, double& error) {
  const double value = Kronrod::integrate(f, a, b, 0, 0.0, &error);
  // boost reports this error on the reference interval [-1, 1]
  error *= 0.5 * (b - a);
  return value;
}

// Bisects until each piece meets the relative tolerance or an error density
// `floor` per unit length. The floor stops refinement once the estimate is
// down to the integrand's rounding noise.
template <typename F>
double adaptive(F& f, double a, double b, double tol, double floor, unsigned depth) {
  double error = 0.0;
  const double estimate = kronrod(f, a, b, error);
  if (depth == 0 || error <= tol * std::abs(estimate) || error <= floor * (b - a)) {
    return estimate;
  }
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, tol, floor, depth - 1) + adaptive(f, mid, b, tol, floor, depth - 1);
}

// Integral over [a, b] split at the given interior points. `noise` is the
// rounding level of f itself; no point refining below it.
template <typename F>
double integrate_pieces(F f, double a, double b, std::vector<double> breaks, double tol,
                        double noise = 0.0) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts = {a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > cuts.back() + 1e-12 && x < b - 1e-12) cuts.push_back(x);
  }
  cuts.push_back(b);
  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double error = 0.0;
    coarse += std::abs(kronrod(f, cuts[i], cuts[i + 1], error));
  }
  const double floor = std::max(tol * coarse / (b - a), noise);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive(f, cuts[i], cuts[i + 1], tol, floor, kMaxDepth);
  }
  return total;
}

template <typename F>
double integrate(F f, double a, double b, double tol) {
  return integrate_pieces(f, a, b, {}, tol);
}

// Mass of N(0,1) on [lo, hi], tail-accurate on either side.
double interval_mass(double lo, double hi) {
  if (lo >= 0.0) return normal_tail(lo) - normal_tail(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_tail(hi) - normal_cdf(lo);
}

// Pairwise facet-line intersections of a 2-D polyhedron, each with the two
// unit normals meeting there. Off-set intersections are kept; extra
// breakpoints only cost a few integrand evaluations.
struct Corner {
  std::array<double, 2> at;
  std::array<double, 2> n1;
  std::array<double, 2> n2;
};

std::vector<Corner> corners(const Polyhedron& poly) {
  std::vector<Corner> out;
  const auto& hs = poly.halfspaces();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const auto a = hs[i].normal();
      const auto b = hs[j].normal();
      const double det = a[0] * b[1] - a[1] * b[0];
      if (std::abs(det) < 1e-14) continue;
      const double x = (hs[i].offset() * b[1] - a[1] * hs[j].offset()) / det;
      const double y = (a[0] * hs[j].offset() - hs[i].offset() * b[0]) / det;
      out.push_back({{x, y}, {a[0], a[1]}, {b[0], b[1]}});
    }
  }
  return out;
}

// Where the distance along {(t, x2)} can lose smoothness: crossings with the
// facet lines and with the normal lines through every corner.
std::vector<double> line_breaks(const ConvexTarget& set, double x2) {
  std::vector<double> out;
  const auto* poly = std::get_if<Polyhedron>(&set.shape());
  if (poly == nullptr) return out;
  for (const Halfspace& h : poly->halfspaces()) {
    const auto n = h.normal();
    if (std::abs(n[0]) > 1e-14) out.push_back((h.offset() - n[1] * x2) / n[0]);
  }
  for (const Corner& c : corners(*poly)) {
    for (const auto& n : {c.n1, c.n2}) {
      // c.at + s n meets the line when c.at[1] + s n[1] = x2.
      if (std::abs(n[1]) > 1e-14) out.push_back(c.at[0] + (x2 - c.at[1]) / n[1] * n[0]);
    }
  }
  return out;
}

// x2 levels where a slice changes shape: corners, their offsets by u along
// the outward normals, and the extremes of the rounded corner.
std::vector<double> outer_breaks(const ConvexTarget& set, double u) {
  std::vector<double> out;
  const auto* poly = std::get_if<Polyhedron>(&set.shape());
  if (poly == nullptr) return out;
  for (const Corner& c : corners(*poly)) {
    out.push_back(c.at[1]);
    out.push_back(c.at[1] - u * c.n1[1]);
    out.push_back(c.at[1] - u * c.n2[1]);
    // top and bottom of the arc around the corner
    out.push_back(c.at[1] - u);
    out.push_back(c.at[1] + u);
  }
  return out;
}

double solve_increasing(const std::function<double(double)>& f, double target, double lo,
                        double hi) {
  const double f_lo = f(lo) - target;
  const double f_hi = f(hi) - target;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw DomainError("oracle: no root of h(u) = delta^2 in the search interval");
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&](double u) { return f(u) - target; }, lo, hi, f_lo, f_hi,
      boost::math::tools::eps_tolerance<double>(48), max_iter);
  return 0.5 * (a + b);
}

// Inflated-set interval on the line {(t, x2)} and the integrals along it.
struct LineSlice {
  double p = 0.0;
  double h = 0.0;
};

LineSlice slice(const ConvexTarget& set, double x2, double u, bool want_h) {
  auto g = [&](double t) {
    const std::array<double, 2> x{t, x2};
    return distance(set, x);
  };
  // Golden-section search for the minimiser of the convex function g.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = -kBox;
  double b = kBox;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (gc <= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  const double t_min = gc <= gd ? c : d;
  if (std::min(gc, gd) > u) return {};

  auto boundary = [&](double inside, double outside) {
    // g(inside) <= u < g(outside).
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      (g(mid) <= u ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  const double lo = g(-kBox) <= u ? -kBox : boundary(t_min, -kBox);
  const double hi = g(kBox) <= u ? kBox : boundary(t_min, kBox);

  LineSlice out;
  out.p = interval_mass(lo, hi);
  if (want_h) {
    // d is a difference of points of size |x|, so d^2 carries ~ eps |x| d.
    const double scale = std::max({std::abs(lo), std::abs(hi), std::abs(x2), 1.0});
    const double pdf_max = normal_pdf(std::clamp(0.0, lo, hi));
    const double h_noise = 16.0 * std::numeric_limits<double>::epsilon() * scale * u * pdf_max;
    out.h = integrate_pieces(
        [&](double t) {
          const double dist = g(t);
          return dist * dist * normal_pdf(t);
        },
        lo, hi, line_breaks(set, x2), kInnerTol, h_noise);
  }
  return out;
}

}  // namespace

double quad_h_1d(double r, double u) {
  if (!(u >= 0.0 && u <= r)) throw DomainError("quad_h_1d: need 0 <= u <= r");
  if (u == 0.0) return 0.0;
  return integrate([r](double t) { return t * t * normal_pdf(r - t); }, 0.0, u, 1e-15);
}

double quad_p_1d(double r, double u) { return normal_tail(r - u); }

double root_1d(double r, double delta) {
  return solve_increasing([r](double u) { return quad_h_1d(r, u); }, delta * delta, 0.0, r);
}

Quad2d quad_2d(const ConvexTarget& set, double u) {
  if (set.dim() != 2) throw DomainError("quad_2d: target must be two-dimensional");
  if (!(u >= 0.0)) throw DomainError("quad_2d: u must be nonnegative");
  Quad2d out;
  const std::vector<double> breaks = outer_breaks(set, u);
  out.p = integrate_pieces(
      [&](double x2) { return normal_pdf(x2) * slice(set, x2, u, false).p; }, -kBox, kBox,
      breaks, kOuterTol);
  if (u == 0.0) return out;
  // Relative rounding in h grows like eps |x| / u; never ask for better.
  double reach = 1.0;
  if (const auto* poly = std::get_if<Polyhedron>(&set.shape())) {
    for (const Corner& c : corners(*poly)) reach = std::max(reach, std::hypot(c.at[0], c.at[1]));
  }
  const double h_tol =
      std::max(kOuterTol, 256.0 * std::numeric_limits<double>::epsilon() * reach / u);
  out.h = integrate_pieces(
      [&](double x2) { return normal_pdf(x2) * slice(set, x2, u, true).h; }, -kBox, kBox,
      breaks, h_tol);
  return out;
}

double root_2d(const ConvexTarget& set, double delta) {
  if (!(delta > 0.0)) throw DomainError("root_2d: delta must be positive");
  const double x1_star = norm(min_norm_point(set));
  auto h = [&](double u) { return quad_2d(set, u).h; };
  // h keeps growing with u until the integration box is swallowed
  double hi = 0.5 * std::max(x1_star, 1.0);
  for (int k = 0; k < 8 && h(hi) < delta * delta; ++k) hi *= 2.0;
  return solve_increasing(h, delta * delta, 1e-9 * x1_star, hi);
}

bool BoundReport::all_ok() const {
  for (const BoundEntry& e : entries) {
    if (!e.gap_ok || !e.scaled_p_ok) return false;
  }
  return true;
}

BoundReport check_bounds(const std::vector<BoundInput>& inputs, double delta,
                         double tolerance) {
  BoundReport report;
  const double delta2 = delta * delta;
  for (const BoundInput& in : inputs) {
    BoundEntry e;
    e.r = in.r;
    e.u = in.u;
    e.p = in.p;
    e.gap = in.r - in.u;
    const double q = delta2 / (in.r * in.r);
    e.gap_bound = q < 1.0 ? normal_tail_inverse(q) : -std::numeric_limits<double>::infinity();
    e.gap_ok = e.gap < e.gap_bound;
    e.scaled_p = in.r * in.r * in.p;
    e.scaled_p_ok = e.scaled_p >= delta2 * (1.0 - tolerance);
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace dris::oracle
