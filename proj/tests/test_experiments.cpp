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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "dris/error.hpp"
#include "dris/experiments.hpp"
#include "dris/parallel.hpp"

namespace dris {
namespace {

const char* kSmallToy = R"({
  "target": {"type": "polyhedron",
             "halfspaces": [{"normal": [1, -5], "offset": 1}, {"normal": [1, 5], "offset": 1}]},
  "delta": 0.001,
  "r_values": [2, 3],
  "methods": ["MC", "ET", "DRIS"],
  "n_samples": 20000,
  "n_macroreps": 3,
  "seed": 17
})";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Report JSON with the wall-clock fields blanked out.
std::string stable_json(ExperimentReport report) {
  report.metadata.timestamp.clear();
  for (ReportRow& row : report.rows) {
    row.time_sec = 0.0;
    row.er = 0.0;
    for (Replication& rep : row.replications) rep.result.wall_time = 0.0;
  }
  return format_report(report, ReportFormat::kJson);
}

TEST_SUITE("experiments") {

TEST_CASE("config parsing and validation") {
  const ExperimentConfig c = parse_config(kSmallToy);
  CHECK(c.delta == 0.001);
  CHECK(c.r_values == std::vector<double>{2, 3});
  CHECK(c.methods.size() == 3);
  CHECK(c.n_samples == 20000);
  CHECK(c.seed == 17);
  CHECK_FALSE(c.emit_oracle);
  CHECK(std::holds_alternative<Polyhedron>(c.target));

  const ExperimentConfig again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));

  auto with = [](const std::string& from, const std::string& to) {
    std::string text = kSmallToy;
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  CHECK_THROWS_AS(parse_config(with("\"delta\": 0.001", "\"delta\": 0")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("\"n_macroreps\": 3", "\"n_macroreps\": 1")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("[2, 3]", "[3, 2]")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("[\"MC\", \"ET\", \"DRIS\"]", "[]")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("[\"MC\", \"ET\", \"DRIS\"]", "[\"QMC\"]")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("polyhedron", "sphere")), ConfigError);
  // a wedge holding the origin has no rarity scaling
  CHECK_THROWS_AS(parse_config(with("\"offset\": 1}, {\"normal\": [1, 5], \"offset\": 1}",
                                    "\"offset\": -1}, {\"normal\": [1, 5], \"offset\": -1}")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("portfolio config") {
  const ExperimentConfig c = parse_config(R"({
    "target": {"type": "portfolio", "n_assets": 5, "spot": 100, "vol": 0.3, "rate": 0.05,
               "dt": 0.04, "loss_threshold": 120, "ds_convention": "trading_day",
               "positions": [{"kind": "call", "strike": 100, "maturity": 0.5, "quantity": 10},
                             {"kind": "put", "strike": 100, "maturity": 0.5, "quantity": 5}]},
    "delta": 0.01, "r_values": [2], "methods": ["DRIS"]})");
  const auto& spec = std::get<finance::PortfolioSpec>(c.target);
  CHECK(spec.positions.size() == 5);
  CHECK(spec.positions[3].size() == 2);
  CHECK(spec.convention == finance::DsConvention::kTradingDay);
  CHECK(build_target(c.target, 2.0).dim() == 5);
  const ExperimentConfig again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
}

TEST_CASE("experiment rows, ratios and CSV layout") {
  ExperimentConfig c = parse_config(kSmallToy);
  const ExperimentReport report = run_experiment(c);
  REQUIRE(report.rows.size() == 6);
  for (const ReportRow& row : report.rows) {
    CHECK(row.n_ok == 3);
    CHECK(row.n_failed == 0);
    CHECK(row.p_mean > 0.0);
    CHECK(row.vr >= 0.0);
  }
  const ReportRow* mc = report.find(MethodKind::kCrudeMc, 2.0);
  REQUIRE(mc != nullptr);
  CHECK(mc->vr == 1.0);
  CHECK(mc->er == 1.0);
  const ReportRow* dris = report.find(MethodKind::kDris, 3.0);
  const ReportRow* mc3 = report.find(MethodKind::kCrudeMc, 3.0);
  REQUIRE(dris != nullptr);
  CHECK(dris->vr == doctest::Approx(mc3->p_var / dris->p_var));
  CHECK(dris->er == doctest::Approx(dris->vr * mc3->time_sec / dris->time_sec));
  CHECK(report.metadata.target_kind == "polyhedron");
  CHECK(report.metadata.config_hash.size() == 16);

  const std::string csv = format_report(report, ReportFormat::kCsv);
  CHECK(csv.rfind("method,r,u_mean,u_relerr95,p_mean,p_relerr95,time_sec,vr,er\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + c.methods.size() * c.r_values.size());
  CHECK(csv.find("DRIS,3.00000000000000000e+00,") != std::string::npos);

  const std::string table = format_report(report, ReportFormat::kTable);
  CHECK(table.find("--") != std::string::npos);
}

TEST_CASE("single method, single r, two reps") {
  ExperimentConfig c = parse_config(kSmallToy);
  c.methods = {MethodKind::kDris};
  c.r_values = {2.0};
  c.n_macroreps = 2;
  const ExperimentReport report = run_experiment(c);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].replications.size() == 2);
  CHECK(std::isnan(report.rows[0].vr));
}

TEST_CASE("pipeline failures are recorded per row") {
  ExperimentConfig c = parse_config(kSmallToy);
  c.methods = {MethodKind::kDris};
  c.r_values = {2.0};
  c.delta = 50.0;  // no crossing below x1*
  const ExperimentReport report = run_experiment(c);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].n_failed == 3);
  CHECK_FALSE(report.rows[0].replications[0].error.empty());
}

TEST_CASE("emit and JSON round trip") {
  ExperimentConfig c = parse_config(kSmallToy);
  c.r_values = {2.0};
  c.emit_oracle = true;
  const ExperimentReport report = run_experiment(c);
  REQUIRE(report.oracle.size() == 1);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "dris_report_roundtrip.json";
  emit_report(report, ReportFormat::kJson, path.string());
  const ExperimentReport back = report_from_json(read_file(path));
  CHECK(format_report(back, ReportFormat::kJson) == format_report(report, ReportFormat::kJson));
  CHECK(back.rows[2].replications[1].result.u_hat == report.rows[2].replications[1].result.u_hat);
  CHECK(back.oracle[0].u == report.oracle[0].u);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(emit_report(ExperimentReport{}, ReportFormat::kCsv, (dir / "x.csv").string()),
                  DomainError);
  CHECK_THROWS_AS(emit_report(report, ReportFormat::kCsv, "/nonexistent/dir/out.csv"), IoError);
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
}

TEST_CASE("reports are reproducible across runs and worker counts") {
  ExperimentConfig c = parse_config(kSmallToy);
  c.n_samples = 2 * kChunkSize + 5;
  set_worker_count(1);
  const std::string a = stable_json(run_experiment(c));
  set_worker_count(4);
  const std::string b = stable_json(run_experiment(c));
  set_worker_count(0);
  CHECK(a == b);
  c.seed = 18;
  CHECK(stable_json(run_experiment(c)) != a);
}

}  // TEST_SUITE

}  // namespace
}  // namespace dris
