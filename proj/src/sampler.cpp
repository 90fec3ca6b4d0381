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

#include "dris/sampler.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "dris/error.hpp"
#include "dris/normal.hpp"
#include "dris/parallel.hpp"

namespace dris {
namespace {

constexpr std::size_t kStackDim = 16;

inline double map_first(Proposal proposal, double z1, double shift) {
  switch (proposal) {
    case Proposal::kShiftedExponential:
      return shift + z1 / shift;
    case Proposal::kMeanShift:
      return z1 + shift;
    case Proposal::kNominal:
      return z1;
  }
  return z1;
}

inline double shifted_exp_weight(double z1, double t) {
  if (z1 < 0.0) return 0.0;
  const double w = kInvSqrt2Pi * std::exp(-z1 * z1 / (2.0 * t * t) - 0.5 * t * t) / t;
  return w < std::numeric_limits<double>::min() ? 0.0 : w;
}

inline double weight(Proposal proposal, double z1, double shift) {
  switch (proposal) {
    case Proposal::kShiftedExponential:
      return shifted_exp_weight(z1, shift);
    case Proposal::kMeanShift: {
      const double w = std::exp(-shift * z1 - 0.5 * shift * shift);
      return w < std::numeric_limits<double>::min() ? 0.0 : w;
    }
    case Proposal::kNominal:
      return 1.0;
  }
  return 1.0;
}

// Scratch storage for one canonical point and its pull-back.
class PointScratch {
 public:
  explicit PointScratch(std::size_t dim) : dim_(dim) {
    if (dim > kStackDim) heap_.resize(2 * dim);
  }
  std::span<double> canonical() {
    return dim_ <= kStackDim ? std::span<double>(stack_.data(), dim_)
                             : std::span<double>(heap_.data(), dim_);
  }
  std::span<double> original() {
    return dim_ <= kStackDim ? std::span<double>(stack_.data() + kStackDim, dim_)
                             : std::span<double>(heap_.data() + dim_, dim_);
  }

 private:
  std::size_t dim_;
  std::array<double, 2 * kStackDim> stack_{};
  std::vector<double> heap_;
};

void check_shapes(const SampleBatch& batch, const CanonicalFrame& frame,
                  const ConvexTarget& set) {
  if (batch.dim != frame.dim() || batch.dim != set.dim()) {
    throw DomainError("sample batch, frame and target differ in dimension");
  }
}

double shift_for(Proposal proposal, double u, double x1_star) {
  return proposal == Proposal::kNominal ? 0.0 : x1_star - u;
}

template <typename Draw>
SampleBatch fill_batch(const RngStream& rng, std::size_t n_samples, std::size_t dim,
                       Draw draw) {
  if (n_samples < 1 || dim < 1) throw DomainError("draw_batch: need N >= 1 and n >= 1");
  SampleBatch batch{n_samples, dim, std::vector<double>(n_samples * dim)};
  for_each_chunk(n_samples, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SampleRng gen(rng, i);
      draw(gen, std::span<double>(batch.z.data() + i * dim, dim));
    }
  });
  return batch;
}

}  // namespace

SampleBatch draw_batch(const RngStream& rng, std::size_t n_samples, std::size_t dim) {
  return fill_batch(rng, n_samples, dim, [](SampleRng& gen, std::span<double> row) {
    row[0] = gen.exponential();
    for (std::size_t j = 1; j < row.size(); ++j) row[j] = gen.normal();
  });
}

SampleBatch draw_normal_batch(const RngStream& rng, std::size_t n_samples,
                              std::size_t dim) {
  return fill_batch(rng, n_samples, dim, [](SampleRng& gen, std::span<double> row) {
    for (double& v : row) v = gen.normal();
  });
}

void check_proposal_domain(Proposal proposal, double u, double x1_star) {
  switch (proposal) {
    case Proposal::kShiftedExponential:
      if (!(u > 0.0 && u < x1_star)) {
        throw DomainError("shifted-exponential proposal requires 0 < u < x1*");
      }
      break;
    case Proposal::kMeanShift:
      if (!(u > 0.0 && u <= x1_star)) {
        throw DomainError("mean-shift proposal requires 0 < u <= x1*");
      }
      break;
    case Proposal::kNominal:
      if (!(u >= 0.0)) throw DomainError("u must be nonnegative");
      break;
  }
}

Vector transform(std::span<const double> z, double u, double x1_star) {
  check_proposal_domain(Proposal::kShiftedExponential, u, x1_star);
  if (z.empty()) throw DomainError("transform: empty sample");
  Vector x(z.begin(), z.end());
  const double t = x1_star - u;
  x[0] = t + z[0] / t;
  return x;
}

double likelihood(std::span<const double> z, double u, double x1_star) {
  check_proposal_domain(Proposal::kShiftedExponential, u, x1_star);
  return shifted_exp_weight(z[0], x1_star - u);
}

double twist_likelihood(double x1, double shift) {
  const double w = std::exp(-shift * x1 + 0.5 * shift * shift);
  return w < std::numeric_limits<double>::min() ? 0.0 : w;
}

double KernelValues::h_term(std::size_t i) const {
  return indicator[i] ? dist[i] * dist[i] * lik[i] : 0.0;
}

double KernelValues::p_term(std::size_t i) const { return indicator[i] ? lik[i] : 0.0; }

namespace {

// Sequential sum inside each fixed chunk, pairwise across chunks.
template <typename Term>
double chunked_mean(std::size_t n, Term term) {
  std::vector<double> partial(chunk_count(n), 0.0);
  for (std::size_t c = 0; c < partial.size(); ++c) {
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n, begin + kChunkSize);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    partial[c] = s;
  }
  return pairwise_sum(partial) / static_cast<double>(n);
}

}  // namespace

double KernelValues::h_mean() const {
  return chunked_mean(size(), [this](std::size_t i) { return h_term(i); });
}

double KernelValues::p_mean() const {
  return chunked_mean(size(), [this](std::size_t i) { return p_term(i); });
}

KernelValues eval_kernels(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                          const ConvexTarget& set, Proposal proposal) {
  check_shapes(batch, frame, set);
  check_proposal_domain(proposal, u, frame.x1_star());
  const double shift = shift_for(proposal, u, frame.x1_star());

  KernelValues out;
  out.u = u;
  out.dist.resize(batch.count);
  out.lik.resize(batch.count);
  out.indicator.resize(batch.count);
  for_each_chunk(batch.count, [&](std::size_t, std::size_t begin, std::size_t end) {
    PointScratch scratch(batch.dim);
    auto x = scratch.canonical();
    auto y = scratch.original();
    for (std::size_t i = begin; i < end; ++i) {
      const auto z = batch.row(i);
      std::copy(z.begin(), z.end(), x.begin());
      x[0] = map_first(proposal, z[0], shift);
      frame.to_original(x, y);
      const double d = distance(set, y);
      out.dist[i] = d;
      out.lik[i] = weight(proposal, z[0], shift);
      out.indicator[i] = d <= u ? 1 : 0;
    }
  });
  return out;
}

KernelMeans kernel_means(const SampleBatch& batch, double u, const CanonicalFrame& frame,
                         const ConvexTarget& set, Proposal proposal) {
  check_shapes(batch, frame, set);
  check_proposal_domain(proposal, u, frame.x1_star());
  const double shift = shift_for(proposal, u, frame.x1_star());

  const std::size_t chunks = chunk_count(batch.count);
  std::vector<double> h_part(chunks, 0.0);
  std::vector<double> p_part(chunks, 0.0);
  for_each_chunk(batch.count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    PointScratch scratch(batch.dim);
    auto x = scratch.canonical();
    auto y = scratch.original();
    double h = 0.0;
    double p = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto z = batch.row(i);
      std::copy(z.begin(), z.end(), x.begin());
      x[0] = map_first(proposal, z[0], shift);
      frame.to_original(x, y);
      const double d = set.distance_within(y, u);
      if (d <= u) {
        const double w = weight(proposal, z[0], shift);
        h += d * d * w;
        p += w;
      }
    }
    h_part[chunk] = h;
    p_part[chunk] = p;
  });
  const auto n = static_cast<double>(batch.count);
  return {pairwise_sum(h_part) / n, pairwise_sum(p_part) / n};
}

}  // namespace dris
