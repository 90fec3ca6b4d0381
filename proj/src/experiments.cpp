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

#include "dris/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <type_traits>
#include <sstream>

#include "json.hpp"

#include "dris/error.hpp"
#include "dris/oracle.hpp"

namespace dris {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.96;

// ---------------------------------------------------------------------------
// Config parsing

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

// Scalar fields broadcast to every asset.
std::vector<double> per_asset(const json& j, const char* key, std::size_t n) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  auto out = field<std::vector<double>>(j, key);
  if (out.size() != n) throw ConfigError(std::string("field '") + key + "' needs n_assets entries");
  return out;
}

std::vector<finance::OptionPosition> parse_positions(const json& list) {
  if (!list.is_array()) throw ConfigError("positions must be an array");
  std::vector<finance::OptionPosition> out;
  for (const json& p : list) {
    finance::OptionPosition pos;
    pos.kind = finance::parse_option_kind(field<std::string>(p, "kind"));
    pos.strike = field<double>(p, "strike");
    pos.maturity = field<double>(p, "maturity");
    pos.quantity = field<double>(p, "quantity");
    out.push_back(pos);
  }
  return out;
}

TargetSpec parse_target(const json& t) {
  const auto type = field<std::string>(t, "type");
  try {
    if (type == "polyhedron") {
      std::vector<Halfspace> hs;
      for (const json& h : field<json>(t, "halfspaces")) {
        hs.emplace_back(field<std::vector<double>>(h, "normal"), field<double>(h, "offset"));
      }
      return Polyhedron(std::move(hs));
    }
    if (type == "quadratic") {
      return QuadraticSuperlevel(field<double>(t, "a"), field<std::vector<double>>(t, "b"),
                                 field<std::vector<double>>(t, "c"),
                                 field<double>(t, "threshold"));
    }
    if (type == "portfolio") {
      finance::PortfolioSpec spec;
      spec.n_assets = field<std::size_t>(t, "n_assets");
      spec.spot = per_asset(t, "spot", spec.n_assets);
      spec.vol = per_asset(t, "vol", spec.n_assets);
      spec.rate = field<double>(t, "rate");
      spec.dt = field<double>(t, "dt");
      spec.trading_days = field_or<int>(t, "trading_days", 250);
      spec.loss_threshold = field<double>(t, "loss_threshold");
      spec.convention =
          finance::parse_ds_convention(field_or<std::string>(t, "ds_convention", "annual"));
      if (t.contains("positions_per_asset")) {
        for (const json& list : t.at("positions_per_asset")) {
          spec.positions.push_back(parse_positions(list));
        }
      } else {
        spec.positions.assign(spec.n_assets, parse_positions(field<json>(t, "positions")));
      }
      spec.validate();
      return spec;
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid target: ") + e.what());
  }
  throw ConfigError("unknown target type '" + type + "'");
}

json target_to_json(const TargetSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Polyhedron>) {
          json hs = json::array();
          for (const Halfspace& h : s.halfspaces()) {
            hs.push_back({{"normal", std::vector<double>(h.normal().begin(), h.normal().end())},
                          {"offset", h.offset()}});
          }
          return {{"type", "polyhedron"}, {"halfspaces", hs}};
        } else if constexpr (std::is_same_v<T, QuadraticSuperlevel>) {
          return {{"type", "quadratic"}, {"a", s.a()}, {"b", s.b()}, {"c", s.c()},
                  {"threshold", s.threshold()}};
        } else {
          json per_asset = json::array();
          for (const auto& list : s.positions) {
            json positions = json::array();
            for (const auto& p : list) {
              positions.push_back({{"kind", p.kind == finance::OptionKind::kCall ? "call" : "put"},
                                   {"strike", p.strike},
                                   {"maturity", p.maturity},
                                   {"quantity", p.quantity}});
            }
            per_asset.push_back(positions);
          }
          return {{"type", "portfolio"},
                  {"n_assets", s.n_assets},
                  {"spot", s.spot},
                  {"vol", s.vol},
                  {"rate", s.rate},
                  {"dt", s.dt},
                  {"trading_days", s.trading_days},
                  {"loss_threshold", s.loss_threshold},
                  {"ds_convention", std::string(finance::to_string(s.convention))},
                  {"positions_per_asset", per_asset}};
        }
      },
      spec);
}

std::string target_kind(const TargetSpec& spec) {
  switch (spec.index()) {
    case 0:
      return "polyhedron";
    case 1:
      return "quadratic";
    default:
      return "portfolio";
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Moments {
  double mean = kNaN;
  double var = kNaN;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / static_cast<double>(v.size() - 1);
  return m;
}

void aggregate(ReportRow& row) {
  std::vector<double> u, p, t, asym_rel;
  for (const Replication& rep : row.replications) {
    if (!rep.ok) continue;
    u.push_back(rep.result.u_hat);
    p.push_back(rep.result.p_hat);
    t.push_back(rep.result.wall_time);
    asym_rel.push_back(rep.result.relative_error());
    row.x1_star = rep.result.x1_star;
  }
  row.n_ok = u.size();
  row.n_failed = row.replications.size() - u.size();
  const Moments mu = moments(u);
  const Moments mp = moments(p);
  row.u_mean = mu.mean;
  row.u_relerr95 = kZ95 * std::sqrt(mu.var) / mu.mean;
  row.p_mean = mp.mean;
  row.p_var = mp.var;
  row.p_relerr95 = kZ95 * std::sqrt(mp.var) / mp.mean;
  row.time_sec = moments(t).mean;
  row.asym_relerr95 = moments(asym_rel).mean;
}

double mean_asym_var(const ReportRow& row) {
  std::vector<double> v;
  for (const Replication& rep : row.replications) {
    if (rep.ok) v.push_back(rep.result.asym_var);
  }
  return moments(v).mean;
}

void fill_ratios(std::vector<ReportRow>& rows) {
  for (ReportRow& row : rows) {
    row.vr = row.er = row.asym_vr = kNaN;
    const ReportRow* mc = nullptr;
    for (const ReportRow& other : rows) {
      if (other.method == MethodKind::kCrudeMc && other.r == row.r) mc = &other;
    }
    if (mc == nullptr) continue;
    if (row.method == MethodKind::kCrudeMc) {
      row.vr = row.er = row.asym_vr = 1.0;
      continue;
    }
    row.vr = mc->p_var / row.p_var;
    row.er = row.vr * mc->time_sec / row.time_sec;
    row.asym_vr = mean_asym_var(*mc) / mean_asym_var(row);
  }
}

// ---------------------------------------------------------------------------
// Formatting

std::string sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json replication_to_json(const Replication& rep) {
  const DrisResult& r = rep.result;
  return {{"stream_id", rep.stream_id},
          {"ok", rep.ok},
          {"error", rep.error},
          {"u_hat", number(r.u_hat)},
          {"p_hat", number(r.p_hat)},
          {"asym_var", number(r.asym_var)},
          {"ci_halfwidth", number(r.ci_halfwidth)},
          {"u_ci_halfwidth", number(r.u_ci_halfwidth)},
          {"n_samples", r.n_samples},
          {"root_iterations", r.root_iterations},
          {"wall_time", number(r.wall_time)},
          {"x1_star", number(r.x1_star)},
          {"bracket", {number(r.bracket.lo), number(r.bracket.hi)}},
          {"h_jump", number(r.h_jump)}};
}

Replication replication_from_json(const json& j, MethodKind method) {
  Replication rep;
  rep.stream_id = j.at("stream_id").get<std::uint64_t>();
  rep.ok = j.at("ok").get<bool>();
  rep.error = j.at("error").get<std::string>();
  DrisResult& r = rep.result;
  r.method = method;
  r.u_hat = from_number(j.at("u_hat"));
  r.p_hat = from_number(j.at("p_hat"));
  r.asym_var = from_number(j.at("asym_var"));
  r.ci_halfwidth = from_number(j.at("ci_halfwidth"));
  r.u_ci_halfwidth = from_number(j.at("u_ci_halfwidth"));
  r.n_samples = j.at("n_samples").get<std::size_t>();
  r.root_iterations = j.at("root_iterations").get<int>();
  r.wall_time = from_number(j.at("wall_time"));
  r.x1_star = from_number(j.at("x1_star"));
  r.bracket = {from_number(j.at("bracket")[0]), from_number(j.at("bracket")[1])};
  r.h_jump = from_number(j.at("h_jump"));
  return rep;
}

json report_to_json(const ExperimentReport& report) {
  const ReportMetadata& m = report.metadata;
  json rows = json::array();
  for (const ReportRow& row : report.rows) {
    json reps = json::array();
    for (const Replication& rep : row.replications) reps.push_back(replication_to_json(rep));
    rows.push_back({{"method", std::string(to_string(row.method))},
                    {"r", row.r},
                    {"u_mean", number(row.u_mean)},
                    {"u_relerr95", number(row.u_relerr95)},
                    {"p_mean", number(row.p_mean)},
                    {"p_relerr95", number(row.p_relerr95)},
                    {"time_sec", number(row.time_sec)},
                    {"vr", number(row.vr)},
                    {"er", number(row.er)},
                    {"p_var", number(row.p_var)},
                    {"asym_relerr95", number(row.asym_relerr95)},
                    {"asym_vr", number(row.asym_vr)},
                    {"x1_star", number(row.x1_star)},
                    {"n_ok", row.n_ok},
                    {"n_failed", row.n_failed},
                    {"replications", reps}});
  }
  json oracle = json::array();
  for (const OracleRow& o : report.oracle) {
    oracle.push_back({{"r", o.r}, {"u", number(o.u)}, {"p", number(o.p)}});
  }
  return {{"metadata",
           {{"config_hash", m.config_hash},
            {"seed", m.seed},
            {"timestamp", m.timestamp},
            {"n_samples", m.n_samples},
            {"n_macroreps", m.n_macroreps},
            {"delta", m.delta},
            {"target_kind", m.target_kind},
            {"ds_convention", m.ds_convention}}},
          {"rows", rows},
          {"oracle", oracle}};
}

std::string format_table(const ExperimentReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "Method" << std::setw(6) << "r" << std::setw(24)
     << "u_r (95% rel. err.)" << std::setw(26) << "p_r (95% rel. err.)" << std::setw(10)
     << "Time (s)" << std::setw(12) << "VR" << "ER\n";
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * v << "%";
    return s.str();
  };
  for (const ReportRow& row : report.rows) {
    std::ostringstream u, p, t, vr, er;
    u << std::fixed << std::setprecision(4) << row.u_mean << " (" << pct(row.u_relerr95) << ")";
    p << std::scientific << std::setprecision(2) << row.p_mean << " (" << pct(row.p_relerr95)
      << ")";
    t << std::fixed << std::setprecision(2) << row.time_sec;
    const bool reference = row.method == MethodKind::kCrudeMc;
    if (reference || std::isnan(row.vr)) {
      vr << "--";
      er << "--";
    } else {
      vr << std::fixed << std::setprecision(0) << row.vr;
      er << std::fixed << std::setprecision(1) << row.er;
    }
    os << std::left << std::setw(8) << to_string(row.method) << std::setw(6) << row.r
       << std::setw(24) << u.str() << std::setw(26) << p.str() << std::setw(10) << t.str()
       << std::setw(12) << vr.str() << er.str() << "\n";
  }
  for (const OracleRow& o : report.oracle) {
    std::ostringstream u, p;
    u << std::fixed << std::setprecision(6) << o.u;
    p << std::scientific << std::setprecision(4) << o.p;
    os << std::left << std::setw(8) << "QUAD" << std::setw(6) << o.r << std::setw(24) << u.str()
       << p.str() << "\n";
  }
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ConvexTarget build_target(const TargetSpec& spec, double r) {
  return std::visit(
      [r](const auto& s) -> ConvexTarget {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, finance::PortfolioSpec>) {
          return ConvexTarget(finance::build_loss_set(s, r));
        } else {
          return ConvexTarget(s).at_rarity(r);
        }
      },
      spec);
}

void ExperimentConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (r_values.empty()) throw ConfigError("r_values must not be empty");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0)) throw ConfigError("r_values must be positive");
    if (i > 0 && !(r_values[i] > r_values[i - 1])) {
      throw ConfigError("r_values must be strictly increasing");
    }
  }
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (n_samples < 2) throw ConfigError("n_samples must be at least 2");
  if (n_macroreps < 2) throw ConfigError("n_macroreps must be at least 2");
  try {
    build_target(target, r_values.front());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid target: ") + e.what());
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.target = parse_target(field<json>(j, "target"));
  c.delta = field<double>(j, "delta");
  c.r_values = field<std::vector<double>>(j, "r_values");
  for (const auto& name : field<std::vector<std::string>>(j, "methods")) {
    c.methods.push_back(parse_method(name));
  }
  c.n_samples = field_or<std::size_t>(j, "n_samples", c.n_samples);
  c.n_macroreps = field_or<std::size_t>(j, "n_macroreps", c.n_macroreps);
  c.seed = field_or<std::uint64_t>(j, "seed", 0);
  c.output_path = field_or<std::string>(j, "output_path", "");
  c.emit_oracle = field_or<bool>(j, "emit_oracle", false);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  json methods = json::array();
  for (MethodKind m : config.methods) methods.push_back(std::string(to_string(m)));
  const json j = {{"target", target_to_json(config.target)},
                  {"delta", config.delta},
                  {"r_values", config.r_values},
                  {"methods", methods},
                  {"n_samples", config.n_samples},
                  {"n_macroreps", config.n_macroreps},
                  {"seed", config.seed},
                  {"output_path", config.output_path},
                  {"emit_oracle", config.emit_oracle}};
  return j.dump();
}

const ReportRow* ExperimentReport::find(MethodKind method, double r) const {
  for (const ReportRow& row : rows) {
    if (row.method == method && row.r == r) return &row;
  }
  return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  ReportMetadata& m = report.metadata;
  {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_to_json(config));
    m.config_hash = hash.str();
  }
  m.seed = config.seed;
  m.timestamp = utc_timestamp();
  m.n_samples = config.n_samples;
  m.n_macroreps = config.n_macroreps;
  m.delta = config.delta;
  m.target_kind = target_kind(config.target);
  if (const auto* portfolio = std::get_if<finance::PortfolioSpec>(&config.target)) {
    m.ds_convention = std::string(finance::to_string(portfolio->convention));
  }

  for (MethodKind method : config.methods) {
    for (std::size_t ri = 0; ri < config.r_values.size(); ++ri) {
      const double r = config.r_values[ri];
      ReportRow row;
      row.method = method;
      row.r = r;
      std::optional<ConvexTarget> target;
      std::string target_error;
      try {
        target = build_target(config.target, r);
      } catch (const Error& e) {
        target_error = e.what();
      }
      for (std::size_t rep = 0; rep < config.n_macroreps; ++rep) {
        Replication out;
        out.stream_id = derive_stream_id(static_cast<std::uint64_t>(method), ri, rep);
        if (!target) {
          out.error = target_error;
        } else {
          try {
            out.result = run_method(method, *target, config.delta, config.n_samples,
                                    RngStream{config.seed, out.stream_id});
            out.ok = true;
          } catch (const Error& e) {
            out.error = e.what();
          }
        }
        row.replications.push_back(std::move(out));
      }
      aggregate(row);
      report.rows.push_back(std::move(row));
    }
  }
  fill_ratios(report.rows);

  if (config.emit_oracle && build_target(config.target, config.r_values.front()).dim() == 2) {
    report.oracle = run_oracle(config);
  }
  return report;
}

std::vector<OracleRow> run_oracle(const ExperimentConfig& config) {
  std::vector<OracleRow> rows;
  for (double r : config.r_values) {
    const ConvexTarget target = build_target(config.target, r);
    if (target.dim() > 2) throw DomainError("oracle rows need a target of dimension <= 2");
    OracleRow row;
    row.r = r;
    if (target.dim() == 1) {
      const double x1 = norm(min_norm_point(target));
      row.u = oracle::root_1d(x1, config.delta);
      row.p = oracle::quad_p_1d(x1, row.u);
    } else {
      row.u = oracle::root_2d(target, config.delta);
      row.p = oracle::quad_2d(target, row.u).p;
    }
    rows.push_back(row);
  }
  return rows;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "table") return ReportFormat::kTable;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string format_report(const ExperimentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return report_to_json(report).dump(2) + "\n";
    case ReportFormat::kTable:
      return format_table(report);
    case ReportFormat::kCsv:
      break;
  }
  std::string out(kCsvHeader);
  out += "\n";
  for (const ReportRow& row : report.rows) {
    out += std::string(to_string(row.method)) + "," + sci(row.r) + "," + sci(row.u_mean) + "," +
           sci(row.u_relerr95) + "," + sci(row.p_mean) + "," + sci(row.p_relerr95) + "," +
           sci(row.time_sec) + "," + sci(row.vr) + "," + sci(row.er) + "\n";
  }
  return out;
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  if (report.rows.empty() && report.oracle.empty()) throw DomainError("report has no rows");
  const std::string text = format_report(report, format);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report to '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing report to '" + path + "'");
}

ExperimentReport report_from_json(std::string_view json_text) {
  ExperimentReport report;
  try {
    const json j = json::parse(json_text);
    const json& m = j.at("metadata");
    report.metadata.config_hash = m.at("config_hash").get<std::string>();
    report.metadata.seed = m.at("seed").get<std::uint64_t>();
    report.metadata.timestamp = m.at("timestamp").get<std::string>();
    report.metadata.n_samples = m.at("n_samples").get<std::size_t>();
    report.metadata.n_macroreps = m.at("n_macroreps").get<std::size_t>();
    report.metadata.delta = m.at("delta").get<double>();
    report.metadata.target_kind = m.at("target_kind").get<std::string>();
    report.metadata.ds_convention = m.at("ds_convention").get<std::string>();
    for (const json& r : j.at("rows")) {
      ReportRow row;
      row.method = parse_method(r.at("method").get<std::string>());
      row.r = r.at("r").get<double>();
      row.u_mean = from_number(r.at("u_mean"));
      row.u_relerr95 = from_number(r.at("u_relerr95"));
      row.p_mean = from_number(r.at("p_mean"));
      row.p_relerr95 = from_number(r.at("p_relerr95"));
      row.time_sec = from_number(r.at("time_sec"));
      row.vr = from_number(r.at("vr"));
      row.er = from_number(r.at("er"));
      row.p_var = from_number(r.at("p_var"));
      row.asym_relerr95 = from_number(r.at("asym_relerr95"));
      row.asym_vr = from_number(r.at("asym_vr"));
      row.x1_star = from_number(r.at("x1_star"));
      row.n_ok = r.at("n_ok").get<std::size_t>();
      row.n_failed = r.at("n_failed").get<std::size_t>();
      for (const json& rep : r.at("replications")) {
        row.replications.push_back(replication_from_json(rep, row.method));
      }
      report.rows.push_back(std::move(row));
    }
    for (const json& o : j.at("oracle")) {
      report.oracle.push_back(
          {o.at("r").get<double>(), from_number(o.at("u")), from_number(o.at("p"))});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
  return report;
}

}  // namespace dris
