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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dris/estimator.hpp"
#include "dris/finance.hpp"
#include "dris/geometry.hpp"

namespace dris {

// Polyhedra and quadratic sets are rescaled to E_r = (r / |x*|) E; a
// portfolio is rebuilt with its risk factors scaled by 1 / r.
using TargetSpec = std::variant<Polyhedron, QuadraticSuperlevel, finance::PortfolioSpec>;

ConvexTarget build_target(const TargetSpec& spec, double r);

struct ExperimentConfig {
  TargetSpec target = finance::PortfolioSpec{};
  double delta = 0.0;
  std::vector<double> r_values;
  std::vector<MethodKind> methods;
  std::size_t n_samples = 1'000'000;
  std::size_t n_macroreps = 20;
  std::uint64_t seed = 0;
  std::string output_path;
  bool emit_oracle = false;

  // Throws ConfigError.
  void validate() const;
};

// JSON config document. Throws ConfigError on schema violations.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
// Canonical JSON form of a config (used for the report's config hash).
std::string config_to_json(const ExperimentConfig& config);

struct Replication {
  std::uint64_t stream_id = 0;
  bool ok = false;
  std::string error;
  DrisResult result;
};

struct ReportRow {
  MethodKind method = MethodKind::kDris;
  double r = 0.0;
  double u_mean = 0.0;
  double u_relerr95 = 0.0;
  double p_mean = 0.0;
  double p_relerr95 = 0.0;
  double time_sec = 0.0;
  // Across-replication variance ratio against crude MC and its runtime-
  // adjusted version. 1 on MC rows, NaN without an MC row for this r.
  double vr = 0.0;
  double er = 0.0;
  double p_var = 0.0;
  // Mean within-run 95% relative error from the asymptotic variance.
  double asym_relerr95 = 0.0;
  // Ratio of mean asymptotic variances (MC / method); diagnostic only.
  double asym_vr = 0.0;
  double x1_star = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  std::vector<Replication> replications;
};

struct OracleRow {
  double r = 0.0;
  double u = 0.0;
  double p = 0.0;
};

struct ReportMetadata {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::size_t n_samples = 0;
  std::size_t n_macroreps = 0;
  double delta = 0.0;
  std::string target_kind;
  // Portfolio dS convention; empty for geometric targets.
  std::string ds_convention;
};

struct ExperimentReport {
  ReportMetadata metadata;
  std::vector<ReportRow> rows;
  std::vector<OracleRow> oracle;

  const ReportRow* find(MethodKind method, double r) const;
};

// Runs n_macroreps independent pipelines per (method, r) on streams derived
// from (seed, method, r index, replication). Failed replications are kept
// with their error message and excluded from the aggregates.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Quadrature rows for two-dimensional targets; throws DomainError otherwise.
std::vector<OracleRow> run_oracle(const ExperimentConfig& config);

enum class ReportFormat { kCsv, kJson, kTable };
ReportFormat parse_report_format(std::string_view name);

inline constexpr std::string_view kCsvHeader =
    "method,r,u_mean,u_relerr95,p_mean,p_relerr95,time_sec,vr,er";

std::string format_report(const ExperimentReport& report, ReportFormat format);
// Writes the formatted report; throws DomainError for an empty report and
// IoError for an unwritable path.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

ExperimentReport report_from_json(std::string_view json_text);

}  // namespace dris
