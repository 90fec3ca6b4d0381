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
#include <string_view>
#include <vector>

#include "dris/geometry.hpp"

namespace dris::finance {

enum class OptionKind { kCall, kPut };

OptionKind parse_option_kind(std::string_view name);

struct OptionPosition {
  OptionKind kind = OptionKind::kCall;
  double strike = 0.0;
  double maturity = 0.0;  // years
  double quantity = 0.0;  // signed
};

struct Greeks {
  double price = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  // dV/dt in calendar time, per year.
  double theta = 0.0;
};

// Black-Scholes price and sensitivities of a European option.
Greeks bs_greeks(OptionKind kind, double spot, double strike, double vol, double rate,
                 double maturity);

// How the horizon dt enters the price move dS_i = sigma_i sqrt(h) S_i X_i
// and the theta carry -theta * h.
enum class DsConvention {
  // h = dt, with dt and sigma both per year.
  kAnnual,
  // h = dt / trading_days.
  kTradingDay,
};

std::string_view to_string(DsConvention convention);
DsConvention parse_ds_convention(std::string_view name);

struct PortfolioSpec {
  std::size_t n_assets = 0;
  std::vector<double> spot;
  std::vector<double> vol;
  double rate = 0.0;
  double dt = 0.0;
  int trading_days = 250;
  // positions[i] are the options written on asset i.
  std::vector<std::vector<OptionPosition>> positions;
  double loss_threshold = 0.0;
  DsConvention convention = DsConvention::kAnnual;

  // Throws DomainError when a field violates its invariant.
  void validate() const;
};

// Per-asset aggregated greeks of the portfolio.
struct AssetGreeks {
  double delta = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
};

std::vector<AssetGreeks> aggregate_greeks(const PortfolioSpec& spec);

// Delta-gamma loss event {x : a + sum_i (b_i x_i + c_i x_i^2) >= loss_threshold}
// in standard-normal risk factors scaled by 1 / r_scale:
//   a   = -sum_i theta_i h
//   b_i = -delta_i sigma_i sqrt(h) S_i / r_scale
//   c_i = -gamma_i sigma_i^2 h S_i^2 / (2 r_scale^2)
// Throws DomainError if some aggregated gamma is negative (non-convex set).
QuadraticSuperlevel build_loss_set(const PortfolioSpec& spec, double r_scale);

}  // namespace dris::finance
