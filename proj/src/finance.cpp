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

#include "dris/finance.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "dris/error.hpp"
#include "dris/normal.hpp"

namespace dris::finance {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

double horizon(const PortfolioSpec& spec) {
  return spec.convention == DsConvention::kAnnual ? spec.dt : spec.dt / spec.trading_days;
}

}  // namespace

OptionKind parse_option_kind(std::string_view name) {
  const std::string s = lower(name);
  if (s == "call") return OptionKind::kCall;
  if (s == "put") return OptionKind::kPut;
  throw ConfigError("unknown option kind '" + std::string(name) + "'");
}

std::string_view to_string(DsConvention convention) {
  return convention == DsConvention::kAnnual ? "annual" : "trading_day";
}

DsConvention parse_ds_convention(std::string_view name) {
  const std::string s = lower(name);
  if (s == "annual") return DsConvention::kAnnual;
  if (s == "trading_day") return DsConvention::kTradingDay;
  throw ConfigError("unknown dS convention '" + std::string(name) + "'");
}

Greeks bs_greeks(OptionKind kind, double spot, double strike, double vol, double rate,
                 double maturity) {
  if (!(maturity > 0.0)) throw DomainError("bs_greeks: maturity must be positive");
  if (!(spot > 0.0) || !(strike > 0.0) || !(vol > 0.0)) {
    throw DomainError("bs_greeks: spot, strike and vol must be positive");
  }
  const double sqrt_t = std::sqrt(maturity);
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) /
                    (vol * sqrt_t);
  const double d2 = d1 - vol * sqrt_t;
  const double discount = strike * std::exp(-rate * maturity);
  const double pdf_d1 = normal_pdf(d1);
  const double decay = -spot * pdf_d1 * vol / (2.0 * sqrt_t);

  Greeks g;
  g.gamma = pdf_d1 / (spot * vol * sqrt_t);
  if (kind == OptionKind::kCall) {
    g.price = spot * normal_cdf(d1) - discount * normal_cdf(d2);
    g.delta = normal_cdf(d1);
    g.theta = decay - rate * discount * normal_cdf(d2);
  } else {
    g.price = discount * normal_cdf(-d2) - spot * normal_cdf(-d1);
    g.delta = normal_cdf(d1) - 1.0;
    g.theta = decay + rate * discount * normal_cdf(-d2);
  }
  return g;
}

void PortfolioSpec::validate() const {
  if (n_assets == 0) throw DomainError("portfolio needs at least one asset");
  if (spot.size() != n_assets || vol.size() != n_assets || positions.size() != n_assets) {
    throw DomainError("portfolio: per-asset fields must have n_assets entries");
  }
  for (std::size_t i = 0; i < n_assets; ++i) {
    if (!(spot[i] > 0.0)) throw DomainError("portfolio: spot must be positive");
    if (!(vol[i] > 0.0)) throw DomainError("portfolio: vol must be positive");
    for (const OptionPosition& p : positions[i]) {
      if (!(p.strike > 0.0) || !(p.maturity > 0.0)) {
        throw DomainError("portfolio: option strike and maturity must be positive");
      }
    }
  }
  if (!(dt > 0.0)) throw DomainError("portfolio: dt must be positive");
  if (trading_days <= 0) throw DomainError("portfolio: trading_days must be positive");
  if (!(loss_threshold > 0.0)) throw DomainError("portfolio: loss threshold must be positive");
}

std::vector<AssetGreeks> aggregate_greeks(const PortfolioSpec& spec) {
  spec.validate();
  std::vector<AssetGreeks> out(spec.n_assets);
  for (std::size_t i = 0; i < spec.n_assets; ++i) {
    for (const OptionPosition& p : spec.positions[i]) {
      const Greeks g =
          bs_greeks(p.kind, spec.spot[i], p.strike, spec.vol[i], spec.rate, p.maturity);
      out[i].delta += p.quantity * g.delta;
      out[i].gamma += p.quantity * g.gamma;
      out[i].theta += p.quantity * g.theta;
    }
  }
  return out;
}

QuadraticSuperlevel build_loss_set(const PortfolioSpec& spec, double r_scale) {
  if (!(r_scale > 0.0)) throw DomainError("build_loss_set: r_scale must be positive");
  const std::vector<AssetGreeks> greeks = aggregate_greeks(spec);
  const double h = horizon(spec);
  double a = 0.0;
  Vector b(spec.n_assets);
  Vector c(spec.n_assets);
  for (std::size_t i = 0; i < spec.n_assets; ++i) {
    if (greeks[i].gamma < 0.0) {
      throw DomainError("build_loss_set: negative portfolio gamma gives a non-convex loss set");
    }
    const double move = spec.vol[i] * std::sqrt(h) * spec.spot[i];
    a -= greeks[i].theta * h;
    b[i] = -greeks[i].delta * move / r_scale;
    c[i] = -0.5 * greeks[i].gamma * move * move / (r_scale * r_scale);
  }
  return QuadraticSuperlevel(a, std::move(b), std::move(c), spec.loss_threshold);
}

}  // namespace dris::finance
