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

#include "dris/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "dris/error.hpp"

namespace dris {
namespace {

constexpr std::size_t kMaxActiveSetFacets = 16;
constexpr std::size_t kMaxActiveSetDim = 8;
constexpr int kDykstraMaxSweeps = 10000;
constexpr double kDykstraTol = 1e-12;
constexpr int kDualMaxIterations = 200;
constexpr double kDualTol = 1e-12;
constexpr std::size_t kStackDim = 16;

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
  }
}

// Solves the k x k system A y = rhs in place (row-major, partial pivoting).
// Returns false when a pivot falls below `pivot_tol`.
bool solve_small(std::array<double, kMaxActiveSetDim * kMaxActiveSetDim>& a,
                 std::array<double, kMaxActiveSetDim>& rhs, std::size_t k,
                 double pivot_tol) {
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < k; ++row) {
      if (std::abs(a[row * k + col]) > std::abs(a[pivot * k + col])) pivot = row;
    }
    if (std::abs(a[pivot * k + col]) < pivot_tol) return false;
    if (pivot != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[col * k + j], a[pivot * k + j]);
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t row = col + 1; row < k; ++row) {
      const double f = a[row * k + col] / a[col * k + col];
      for (std::size_t j = col; j < k; ++j) a[row * k + j] -= f * a[col * k + j];
      rhs[row] -= f * rhs[col];
    }
  }
  for (std::size_t i = k; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= a[i * k + j] * rhs[j];
    rhs[i] = s / a[i * k + i];
  }
  return true;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// Halfspace

Halfspace::Halfspace(Vector normal, double offset)
    : normal_(std::move(normal)), offset_(offset) {
  if (normal_.empty()) throw DomainError("halfspace normal is empty");
  require_finite(normal_, "halfspace normal");
  if (!std::isfinite(offset_)) throw DomainError("halfspace offset must be finite");
  const double length = norm(normal_);
  if (length == 0.0) throw DomainError("halfspace normal is zero");
  for (double& v : normal_) v /= length;
  offset_ /= length;
}

double Halfspace::slack(std::span<const double> x) const {
  return dot(normal_, x) - offset_;
}

// ---------------------------------------------------------------------------
// Polyhedron

Polyhedron::Polyhedron(std::vector<Halfspace> halfspaces, Unchecked)
    : halfspaces_(std::move(halfspaces)) {
  if (halfspaces_.empty()) throw DomainError("polyhedron has no halfspaces");
  dim_ = halfspaces_.front().dim();
  for (const Halfspace& h : halfspaces_) {
    if (h.dim() != dim_) throw DomainError("polyhedron halfspaces differ in dimension");
  }
  const std::size_t m = halfspaces_.size();
  gram_.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      gram_[i * m + j] = dot(halfspaces_[i].normal(), halfspaces_[j].normal());
    }
  }
  if (use_active_set()) {
    const std::size_t max_active = std::min(m, dim_);
    for (std::size_t k = 1; k <= max_active; ++k) {
      for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) == k) {
          active_sets_.push_back(mask);
        }
      }
    }
  }
}

Polyhedron::Polyhedron(std::vector<Halfspace> halfspaces)
    : Polyhedron(std::move(halfspaces), Unchecked{}) {
  bool origin_inside = true;
  for (const Halfspace& h : halfspaces_) origin_inside &= h.offset() <= 0.0;
  if (origin_inside) throw DomainError("polyhedron contains the origin");

  // Feasibility: the projection of the origin exists iff the set is nonempty.
  const Vector origin(dim_, 0.0);
  Vector p(dim_);
  bool feasible = use_active_set() && project_active_set(origin, p);
  if (!feasible) {
    try {
      p = project_dykstra(origin);
      feasible = contains(p, 1e-9);
    } catch (const NumericalError&) {
      feasible = false;
    }
  }
  if (!feasible) throw DomainError("polyhedron is empty");
}

bool Polyhedron::use_active_set() const {
  return halfspaces_.size() <= kMaxActiveSetFacets && dim_ <= kMaxActiveSetDim;
}

bool Polyhedron::contains(std::span<const double> x, double tol) const {
  for (const Halfspace& h : halfspaces_) {
    if (h.slack(x) < -tol) return false;
  }
  return true;
}

double Polyhedron::distance_lower_bound(std::span<const double> x) const {
  double worst = 0.0;
  for (const Halfspace& h : halfspaces_) worst = std::max(worst, -h.slack(x));
  return worst;
}

bool Polyhedron::project_active_set(std::span<const double> x,
                                    std::span<double> out) const {
  const std::size_t m = halfspaces_.size();
  std::array<double, kMaxActiveSetFacets> slack{};
  double magnitude = 1.0;
  std::uint32_t violated = 0;
  for (std::size_t j = 0; j < m; ++j) {
    slack[j] = halfspaces_[j].slack(x);
    if (slack[j] < 0.0) violated |= 1u << j;
    magnitude = std::max(magnitude, std::max(std::abs(halfspaces_[j].offset()), std::abs(slack[j])));
  }
  if (violated == 0) {
    std::copy(x.begin(), x.end(), out.begin());
    return true;
  }
  const double feas_tol = 1e-11 * magnitude;

  std::array<std::size_t, kMaxActiveSetDim> idx{};
  std::array<double, kMaxActiveSetDim * kMaxActiveSetDim> system{};
  std::array<double, kMaxActiveSetDim> lambda{};
  for (const std::uint32_t mask : active_sets_) {
    // An active set made only of satisfied constraints cannot move x.
    if ((mask & violated) == 0) continue;
    std::size_t k = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (1u << j)) idx[k++] = j;
    }

    if (k == 1) {
      lambda[0] = -slack[idx[0]];
    } else {
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) system[r * k + c] = gram_[idx[r] * m + idx[c]];
        lambda[r] = -slack[idx[r]];
      }
      if (!solve_small(system, lambda, k, 1e-12)) continue;
    }

    bool dual_ok = true;
    for (std::size_t r = 0; r < k; ++r) dual_ok &= lambda[r] >= -1e-14 * magnitude;
    if (!dual_ok) continue;

    bool primal_ok = true;
    for (std::size_t j = 0; j < m && primal_ok; ++j) {
      double s = slack[j];
      for (std::size_t r = 0; r < k; ++r) s += gram_[j * m + idx[r]] * lambda[r];
      primal_ok = s >= -feas_tol;
    }
    if (!primal_ok) continue;

    std::copy(x.begin(), x.end(), out.begin());
    for (std::size_t r = 0; r < k; ++r) {
      const auto n = halfspaces_[idx[r]].normal();
      const double l = std::max(lambda[r], 0.0);
      for (std::size_t i = 0; i < dim_; ++i) out[i] += l * n[i];
    }
    return true;
  }
  return false;
}

Vector Polyhedron::project_dykstra(std::span<const double> x) const {
  const std::size_t m = halfspaces_.size();
  Vector current(x.begin(), x.end());
  Vector previous(dim_);
  Vector y(dim_);
  std::vector<Vector> increments(m, Vector(dim_, 0.0));
  double move = 0.0;
  for (int sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    previous = current;
    double shift = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < dim_; ++i) y[i] = current[i] + increments[j][i];
      const double s = halfspaces_[j].slack(y);
      const auto n = halfspaces_[j].normal();
      for (std::size_t i = 0; i < dim_; ++i) {
        current[i] = s < 0.0 ? y[i] - s * n[i] : y[i];
        const double inc = y[i] - current[i];
        // the iterate can sit still for a sweep while increments still move
        shift += (inc - increments[j][i]) * (inc - increments[j][i]);
        increments[j][i] = inc;
      }
    }
    move = shift;
    for (std::size_t i = 0; i < dim_; ++i) {
      move += (current[i] - previous[i]) * (current[i] - previous[i]);
    }
    move = std::sqrt(move);
    if (move <= kDykstraTol * (1.0 + norm(current)) &&
        distance_lower_bound(current) <= 1e-9 * (1.0 + norm(current))) {
      return current;
    }
  }
  throw NumericalError("Dykstra projection did not converge",
                       std::max(move, distance_lower_bound(current)));
}

void Polyhedron::project(std::span<const double> x, std::span<double> out) const {
  if (use_active_set() && project_active_set(x, out)) return;
  const Vector p = project_dykstra(x);
  std::copy(p.begin(), p.end(), out.begin());
}

Polyhedron Polyhedron::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("scale factor must be positive and finite");
  }
  std::vector<Halfspace> out;
  out.reserve(halfspaces_.size());
  for (const Halfspace& h : halfspaces_) {
    out.emplace_back(Vector(h.normal().begin(), h.normal().end()), h.offset() * factor);
  }
  return Polyhedron(std::move(out), Unchecked{});
}

// ---------------------------------------------------------------------------
// QuadraticSuperlevel

QuadraticSuperlevel::QuadraticSuperlevel(double a, Vector b, Vector c,
                                         double threshold)
    : a_(a), b_(std::move(b)), c_(std::move(c)), threshold_(threshold) {
  if (b_.empty()) throw DomainError("quadratic set needs at least one coordinate");
  if (b_.size() != c_.size()) throw DomainError("quadratic set: b and c differ in length");
  require_finite(b_, "quadratic coefficient b");
  require_finite(c_, "quadratic coefficient c");
  if (!std::isfinite(a_) || !std::isfinite(threshold_)) {
    throw DomainError("quadratic set: a and threshold must be finite");
  }
  for (double ci : c_) {
    if (ci > 0.0) throw DomainError("quadratic set is not convex: some c_i > 0");
  }
  if (a_ >= threshold_) throw DomainError("quadratic set contains the origin (a >= threshold)");
  if (!(supremum() > threshold_)) throw DomainError("quadratic set is empty");
}

double QuadraticSuperlevel::value(std::span<const double> x) const {
  double q = a_;
  for (std::size_t i = 0; i < b_.size(); ++i) q += x[i] * (b_[i] + c_[i] * x[i]);
  return q;
}

double QuadraticSuperlevel::supremum() const {
  double sup = a_;
  for (std::size_t i = 0; i < b_.size(); ++i) {
    if (c_[i] < 0.0) {
      sup -= b_[i] * b_[i] / (4.0 * c_[i]);
    } else if (b_[i] != 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return sup;
}

bool QuadraticSuperlevel::contains(std::span<const double> x) const {
  return value(x) >= threshold_;
}

double QuadraticSuperlevel::distance_lower_bound(std::span<const double> x) const {
  const double gap = threshold_ - value(x);
  if (gap <= 0.0) return 0.0;
  double g2 = 0.0;
  for (std::size_t i = 0; i < b_.size(); ++i) {
    const double g = b_[i] + 2.0 * c_[i] * x[i];
    g2 += g * g;
  }
  return g2 > 0.0 ? gap / std::sqrt(g2) : std::numeric_limits<double>::infinity();
}

double QuadraticSuperlevel::projection_multiplier(std::span<const double> z) const {
  const std::size_t n = b_.size();
  // residual(l) = q(x(l)) - threshold is increasing in l.
  auto evaluate = [&](double lambda, double& slope) {
    double q = a_;
    slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double inv = 1.0 / (1.0 - 2.0 * lambda * c_[i]);
      const double xi = (z[i] + lambda * b_[i]) * inv;
      const double g = b_[i] + 2.0 * c_[i] * xi;
      q += xi * (b_[i] + c_[i] * xi);
      slope += g * g * inv;
    }
    return q - threshold_;
  };

  double slope = 0.0;
  double residual = evaluate(0.0, slope);
  if (residual >= 0.0) return 0.0;
  const double tol = kDualTol * std::max(1.0, std::abs(threshold_));

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double lambda = 0.0;
  for (int it = 0; it < kDualMaxIterations; ++it) {
    if (std::abs(residual) <= tol) return lambda;
    if (residual < 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    if (std::isfinite(hi) && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return hi;
    }
    double next = slope > 0.0 ? lambda - residual / slope
                              : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(hi)) {
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else if (!(next > lo)) {
      // Grow the bracket geometrically until the residual changes sign.
      next = lo > 0.0 ? 2.0 * lo : 1.0;
    }
    lambda = next;
    residual = evaluate(lambda, slope);
  }
  throw NumericalError("quadratic projection dual did not converge", residual);
}

void QuadraticSuperlevel::project(std::span<const double> z, std::span<double> out) const {
  const double lambda = projection_multiplier(z);
  for (std::size_t i = 0; i < b_.size(); ++i) {
    out[i] = (z[i] + lambda * b_[i]) / (1.0 - 2.0 * lambda * c_[i]);
  }
}

QuadraticSuperlevel QuadraticSuperlevel::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("scale factor must be positive and finite");
  }
  Vector b = b_;
  Vector c = c_;
  for (double& v : b) v /= factor;
  for (double& v : c) v /= factor * factor;
  return QuadraticSuperlevel(a_, std::move(b), std::move(c), threshold_);
}

// ---------------------------------------------------------------------------
// ConvexTarget

ConvexTarget::ConvexTarget(Polyhedron shape) : shape_(std::move(shape)) {}
ConvexTarget::ConvexTarget(QuadraticSuperlevel shape) : shape_(std::move(shape)) {}
ConvexTarget::ConvexTarget(Shape shape, double scale)
    : shape_(std::move(shape)), scale_(scale) {}

std::size_t ConvexTarget::dim() const {
  return std::visit([](const auto& s) { return s.dim(); }, shape_);
}

bool ConvexTarget::contains(std::span<const double> x) const {
  return std::visit([&](const auto& s) { return s.contains(x); }, shape_);
}

void ConvexTarget::project(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim() || out.size() != dim()) {
    throw DomainError("project: dimension mismatch");
  }
  std::visit([&](const auto& s) { s.project(x, out); }, shape_);
}

double ConvexTarget::distance_lower_bound(std::span<const double> x) const {
  return std::visit([&](const auto& s) { return s.distance_lower_bound(x); }, shape_);
}

double ConvexTarget::distance_within(std::span<const double> x, double radius) const {
  const double bound = distance_lower_bound(x);
  if (bound > radius || bound == 0.0) return bound;
  const std::size_t n = x.size();
  std::array<double, kStackDim> stack{};
  Vector heap;
  std::span<double> p;
  if (n <= kStackDim) {
    p = std::span<double>(stack.data(), n);
  } else {
    heap.resize(n);
    p = heap;
  }
  std::visit([&](const auto& s) { s.project(x, p); }, shape_);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - p[i]) * (x[i] - p[i]);
  return std::sqrt(d2);
}

ConvexTarget ConvexTarget::scaled(double factor) const {
  return std::visit(
      [&](const auto& s) { return ConvexTarget(Shape(s.scaled(factor)), scale_ * factor); },
      shape_);
}

ConvexTarget ConvexTarget::at_rarity(double r) const {
  if (!(r > 0.0)) throw DomainError("rarity parameter must be positive");
  const double reach = norm(min_norm_point(*this));
  if (!(reach > 0.0)) throw DomainError("rarity scaling needs a target that excludes the origin");
  return scaled(r / reach);
}

Vector project(const ConvexTarget& set, std::span<const double> x) {
  Vector out(set.dim());
  set.project(x, out);
  return out;
}

double distance(const ConvexTarget& set, std::span<const double> x) {
  if (x.size() != set.dim()) throw DomainError("distance: dimension mismatch");
  if (set.distance_lower_bound(x) == 0.0) return 0.0;
  const Vector p = project(set, x);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - p[i]) * (x[i] - p[i]);
  return std::sqrt(d2);
}

Vector min_norm_point(const ConvexTarget& set) {
  const Vector origin(set.dim(), 0.0);
  if (set.contains(origin)) throw DomainError("min_norm_point: set contains the origin");
  return project(set, origin);
}

bool inflate_membership(const ConvexTarget& set, std::span<const double> x, double u) {
  if (!(u >= 0.0)) throw DomainError("inflate_membership: u must be nonnegative");
  return distance(set, x) <= u;
}

// ---------------------------------------------------------------------------
// CanonicalFrame

CanonicalFrame::CanonicalFrame(std::span<const double> x_star)
    : dim_(x_star.size()), x1_star_(norm(x_star)), identity_(false) {
  if (dim_ == 0) throw DomainError("canonical frame: empty point");
  if (!(x1_star_ >= 1e-12)) throw DomainError("canonical frame: degenerate set, |x*| < 1e-12");

  // w = v - e1 with v = x*/|x*|; w_1 is formed without cancellation when v
  // is close to e1.
  w_.assign(dim_, 0.0);
  double tail2 = 0.0;
  for (std::size_t i = 1; i < dim_; ++i) {
    w_[i] = x_star[i] / x1_star_;
    tail2 += w_[i] * w_[i];
  }
  const double v1 = x_star[0] / x1_star_;
  w_[0] = v1 > 0.0 ? -tail2 / (1.0 + v1) : v1 - 1.0;
  w_norm2_ = w_[0] * w_[0] + tail2;
  identity_ = w_norm2_ <= 1e-28;
}

Vector CanonicalFrame::rotation() const {
  Vector q(dim_ * dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      q[i * dim_ + j] = (i == j ? 1.0 : 0.0) -
                        (identity_ ? 0.0 : 2.0 * w_[i] * w_[j] / w_norm2_);
    }
  }
  return q;
}

void CanonicalFrame::reflect(std::span<const double> x, std::span<double> out) const {
  if (identity_) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  const double f = 2.0 * dot(w_, x) / w_norm2_;
  for (std::size_t i = 0; i < dim_; ++i) out[i] = x[i] - f * w_[i];
}

void CanonicalFrame::to_canonical(std::span<const double> x, std::span<double> out) const {
  reflect(x, out);
}

void CanonicalFrame::to_original(std::span<const double> x, std::span<double> out) const {
  reflect(x, out);
}

CanonicalFrame canonical_frame(const ConvexTarget& set) {
  return CanonicalFrame(min_norm_point(set));
}

}  // namespace dris
