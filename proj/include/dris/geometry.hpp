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
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace dris {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// {x : normal . x >= offset}; the normal is stored with unit length.
class Halfspace {
 public:
  Halfspace(Vector normal, double offset);

  std::span<const double> normal() const { return normal_; }
  double offset() const { return offset_; }
  std::size_t dim() const { return normal_.size(); }

  // normal . x - offset; nonnegative inside.
  double slack(std::span<const double> x) const;

 private:
  Vector normal_;
  double offset_;
};

// Intersection of halfspaces. Nonempty and origin-free by construction.
class Polyhedron {
 public:
  explicit Polyhedron(std::vector<Halfspace> halfspaces);

  std::size_t dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

  bool contains(std::span<const double> x, double tol = 1e-12) const;

  // Largest halfspace violation; never exceeds the true distance.
  double distance_lower_bound(std::span<const double> x) const;

  // Euclidean projection. Small polyhedra are solved exactly by active-set
  // enumeration on the KKT system; otherwise Dykstra's method is used.
  void project(std::span<const double> x, std::span<double> out) const;

  // Dykstra's alternating projections (max 10 000 sweeps, 1e-12 stop
  // tolerance on iterate movement). Throws NumericalError on failure.
  Vector project_dykstra(std::span<const double> x) const;

  // {s * x : x in this}.
  Polyhedron scaled(double factor) const;

 private:
  struct Unchecked {};
  Polyhedron(std::vector<Halfspace> halfspaces, Unchecked);

  bool project_active_set(std::span<const double> x,
                          std::span<double> out) const;
  bool use_active_set() const;

  std::vector<Halfspace> halfspaces_;
  std::size_t dim_ = 0;
  // Gram matrix of the unit normals, row-major m x m.
  Vector gram_;
  // Active-set candidates ordered by cardinality (bitmask over facets).
  std::vector<std::uint32_t> active_sets_;
};

// {x : a + sum_i (b_i x_i + c_i x_i^2) >= threshold} with every c_i <= 0,
// so the quadratic is concave and the superlevel set convex.
class QuadraticSuperlevel {
 public:
  QuadraticSuperlevel(double a, Vector b, Vector c, double threshold);

  std::size_t dim() const { return b_.size(); }
  double a() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& c() const { return c_; }
  double threshold() const { return threshold_; }

  double value(std::span<const double> x) const;
  // Supremum of the quadratic over R^n (may be +inf).
  double supremum() const;
  bool contains(std::span<const double> x) const;

  // (threshold - q(x)) / |grad q(x)| outside the set, 0 inside; a valid lower
  // bound on the distance because q is concave.
  double distance_lower_bound(std::span<const double> x) const;

  // Projection through the scalar KKT dual: x_i(l) = (z_i + l b_i) /
  // (1 - 2 l c_i) with l >= 0 solving q(x(l)) = threshold. Safeguarded
  // Newton with bisection fallback, residual tolerance 1e-12.
  void project(std::span<const double> x, std::span<double> out) const;

  // Dual multiplier of the projection of x (0 when x is inside).
  double projection_multiplier(std::span<const double> x) const;

  // {s * x : x in this}, i.e. b -> b / s, c -> c / s^2.
  QuadraticSuperlevel scaled(double factor) const;

 private:
  double a_;
  Vector b_;
  Vector c_;
  double threshold_;
};

// Convex rare-event target. `scale()` records the cumulative factor applied
// through scaled()/at_rarity(); the stored shape is already scaled.
class ConvexTarget {
 public:
  using Shape = std::variant<Polyhedron, QuadraticSuperlevel>;

  ConvexTarget(Polyhedron shape);  // NOLINT(google-explicit-constructor)
  ConvexTarget(QuadraticSuperlevel shape);  // NOLINT

  std::size_t dim() const;
  double scale() const { return scale_; }
  const Shape& shape() const { return shape_; }

  bool contains(std::span<const double> x) const;
  void project(std::span<const double> x, std::span<double> out) const;
  double distance_lower_bound(std::span<const double> x) const;

  // Distance if it does not exceed `radius`, otherwise any value > radius.
  // Skips the exact projection whenever the cheap lower bound decides.
  double distance_within(std::span<const double> x, double radius) const;

  ConvexTarget scaled(double factor) const;
  // E_r = (r / |x*|) E, so that the scaled min-norm point has norm r.
  ConvexTarget at_rarity(double r) const;

 private:
  ConvexTarget(Shape shape, double scale);

  Shape shape_;
  double scale_ = 1.0;
};

Vector project(const ConvexTarget& set, std::span<const double> x);
double distance(const ConvexTarget& set, std::span<const double> x);
// Closest point of the set to the origin.
Vector min_norm_point(const ConvexTarget& set);
// d(x, E) <= u, i.e. membership in E + B(0, u).
bool inflate_membership(const ConvexTarget& set, std::span<const double> x,
                        double u);

// Householder reflection Q taking x* / |x*| to e_1, together with
// x1_star = |x*|. Q is symmetric and orthogonal.
class CanonicalFrame {
 public:
  explicit CanonicalFrame(std::span<const double> min_norm_point);

  std::size_t dim() const { return dim_; }
  double x1_star() const { return x1_star_; }
  bool is_identity() const { return identity_; }

  // Dense Q, row-major.
  Vector rotation() const;

  // Q x (original -> canonical).
  void to_canonical(std::span<const double> x, std::span<double> out) const;
  // Q^T x (canonical -> original).
  void to_original(std::span<const double> x, std::span<double> out) const;

 private:
  void reflect(std::span<const double> x, std::span<double> out) const;

  std::size_t dim_;
  double x1_star_;
  bool identity_;
  Vector w_;
  double w_norm2_ = 0.0;
};

CanonicalFrame canonical_frame(const ConvexTarget& set);

}  // namespace dris
