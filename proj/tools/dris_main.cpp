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

// Command-line front end: `dris run` and `dris oracle`.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dris/error.hpp"
#include "dris/experiments.hpp"

namespace {

int fail(std::string_view kind, std::string_view message) {
  const nlohmann::json record = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << record.dump() << std::endl;
  return 1;
}

void write_output(const dris::ExperimentReport& report, dris::ReportFormat format,
                  const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << dris::format_report(report, format);
  } else {
    dris::emit_report(report, format, path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case rare-event probabilities over a Wasserstein ball"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format_name = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> reps;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "report path; stdout when omitted");
  run->add_option("--format", format_name, "csv, json or table")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--samples", samples, "override samples per pipeline");
  run->add_option("--reps", reps, "override macroreplication count");

  std::string oracle_format = "csv";
  CLI::App* oracle = app.add_subcommand("oracle", "quadrature rows for targets of dimension <= 2");
  oracle->add_option("--config", config_path, "experiment config (JSON)")->required();
  oracle->add_option("--out", out_path, "report path; stdout when omitted");
  oracle->add_option("--format", oracle_format, "csv, json or table")
      ->check(CLI::IsMember({"csv", "json", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    dris::ExperimentConfig config = dris::load_config(config_path);
    if (*run) {
      if (seed) config.seed = *seed;
      if (samples) config.n_samples = *samples;
      if (reps) config.n_macroreps = *reps;
      config.validate();
      if (out_path.empty()) out_path = config.output_path;
      const dris::ExperimentReport report = dris::run_experiment(config);
      write_output(report, dris::parse_report_format(format_name), out_path);
    } else {
      dris::ExperimentReport report;
      report.metadata.delta = config.delta;
      report.oracle = dris::run_oracle(config);
      const auto format = dris::parse_report_format(oracle_format);
      if (format == dris::ReportFormat::kCsv) {
        std::string text = "r,u,p\n";
        char line[128];
        for (const auto& row : report.oracle) {
          std::snprintf(line, sizeof(line), "%.17e,%.17e,%.17e\n", row.r, row.u, row.p);
          text += line;
        }
        if (out_path.empty() || out_path == "-") {
          std::cout << text;
        } else {
          std::ofstream out(out_path);
          if (!(out << text)) throw dris::IoError("cannot write report to '" + out_path + "'");
        }
      } else {
        write_output(report, format, out_path);
      }
    }
  } catch (const dris::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
