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
#include <vector>

#include "dris/geometry.hpp"
#include "dris/rng.hpp"

namespace dris {

// How a stored sample z is mapped to a point x in the canonical frame and
// weighted back to the nominal N(0, I) law.
enum class Proposal {
  // x_1 = t + z_1 / t with z_1 ~ Exp(1), t = x1* - u.
  kShiftedExponential,
  // x_1 = z_1 + t with z_1 ~ N(0, 1) (mean shift to the inflated boundary).
  kMeanShift,
  // x = z, weight 1 (crude Monte Carlo).
  kNominal,
};

// N draws of an n-vector, row-major.
struct SampleBatch {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> z;

  std::span<const double> row(std::size_t i) const {
    return {z.data() + i * dim, dim};
  }
};

// First column Exp(1), remaining columns N(0, 1).
SampleBatch draw_batch(const RngStream& rng, std::size_t n_samples, std::size_t dim);
// All columns N(0, 1).
SampleBatch draw_normal_batch(const RngStream& rng, std::size_t n_samples,
                              std::size_t dim);

// (x1* - u + z_1 / (x1* - u), z_2, ..., z_n); requires 0 < u < x1*.
Vector transform(std::span<const double> z, double u, double x1_star);

// Likelihood ratio of the shifted-exponential proposal:
//   exp(-z_1^2 / (2 t^2) - t^2 / 2) / (t sqrt(2 pi)),  t = x1* - u,
// and 0 for z_1 < 0. Values below the smallest normal double flush to 0.
double likelihood(std::span<const double> z, double u, double x1_star);

// Likelihood ratio exp(-t x_1 + t^2 / 2) of the mean-shift proposal, given
// the shifted coordinate x_1.
double twist_likelihood(double x1, double shift);

// Per-sample distances, weights and inflated-set indicators at one u.
struct KernelValues {
  double u = 0.0;
  std::vector<double> dist;
  std::vector<double> lik;
  std::vector<std::uint8_t> indicator;

  std::size_t size() const { return dist.size(); }
  // H(z_i, u) = dist^2 * 1{dist <= u} * lik and P(z_i, u) = 1{dist <= u} * lik.
  double h_term(std::size_t i) const;
  double p_term(std::size_t i) const;
  double h_mean() const;
  double p_mean() const;
};

KernelValues eval_kernels(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                          const ConvexTarget& set,
                          Proposal proposal = Proposal::kShiftedExponential);

struct KernelMeans {
  double h = 0.0;
  double p = 0.0;
};

// Same means as eval_kernels(...).h_mean()/p_mean(), bit for bit, without
// materialising per-sample vectors. Exact projections are skipped for
// samples whose distance lower bound already exceeds u.
KernelMeans kernel_means(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                         const ConvexTarget& set,
                         Proposal proposal = Proposal::kShiftedExponential);

// Validates u for the given proposal; throws DomainError.
void check_proposal_domain(Proposal proposal, double u, double x1_star);

}  // namespace dris
