// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THZRIS_CLI_HPP
#define THZRIS_CLI_HPP

// Command-line driver. Needs CLI11.hpp and json.hpp on the include path.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "optimizer.hpp"
#include "queueing.hpp"

#ifndef THZRIS_VERSION
#define THZRIS_VERSION "0.1.0"
#endif

namespace thzris::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kConvergenceError = 2,
  kInfeasible = 3,
  kOracleMismatch = 4,
  kInternalError = 5,
};

/// Everything that determines a run's output. Serialised into the manifest.
struct RunOptions {
  std::string command;
  std::string alpha_grid = "0:0.05:1";
  std::string q_d_grid = "0:0.1:0.5";
  std::string sigma_grid = "0.02:0.02:0.3";
  std::optional<double> alpha;
  double alpha_min = 0.3;
  double target = 0.05;
  std::string scheme = "mcsc";
  long n_slots = 20000;
  int replications = 20;
  int n = 50;
  int grid = 500;
  std::uint64_t seed = 1;
  bool trace = false;
  std::string out;
};

inline Json options_to_json(const RunOptions& o) {
  Json j;
  j["alpha_grid"] = o.alpha_grid;
  j["q_d_grid"] = o.q_d_grid;
  j["sigma_grid"] = o.sigma_grid;
  j["alpha"] = o.alpha ? Json(*o.alpha) : Json(nullptr);
  j["alpha_min"] = o.alpha_min;
  j["target"] = o.target;
  j["scheme"] = o.scheme;
  j["n_slots"] = o.n_slots;
  j["replications"] = o.replications;
  j["n"] = o.n;
  j["grid"] = o.grid;
  j["seed"] = o.seed;
  return j;
}

inline RunOptions options_from_json(const std::string& command, const Json& j) {
  RunOptions o;
  o.command = command;
  o.alpha_grid = j.at("alpha_grid").get<std::string>();
  o.q_d_grid = j.at("q_d_grid").get<std::string>();
  o.sigma_grid = j.at("sigma_grid").get<std::string>();
  if (!j.at("alpha").is_null()) o.alpha = j.at("alpha").get<double>();
  o.alpha_min = j.at("alpha_min").get<double>();
  o.target = j.at("target").get<double>();
  o.scheme = j.at("scheme").get<std::string>();
  o.n_slots = j.at("n_slots").get<long>();
  o.replications = j.at("replications").get<int>();
  o.n = j.at("n").get<int>();
  o.grid = j.at("grid").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  return o;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << x;
  return s.str();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json allocation_json(const PowerAllocation& p) {
  return Json{{"p_h_d", p.p_h_d}, {"p_h_r", p.p_h_r}, {"p_l_d", p.p_l_d}, {"p_l_r", p.p_l_r}};
}

inline Json solve_json(const SolveResult& r) {
  Json j;
  j["p"] = allocation_json(r.p);
  j["R"] = {{"R_h", r.R.R_h}, {"R_l", r.R.R_l}};
  j["delta"] = {{"hc", r.delta.hc}, {"lc", r.delta.lc}};
  j["outage"] = {{"P_out_h", r.outage.P_out_h}, {"P_out_l", r.outage.P_out_l}};
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["objective_trace"] = r.objective_trace;
  return j;
}

inline Json summary_json(const QueueSummary& s, const StabilityVerdict& v) {
  Json j;
  j["n_slots"] = s.n_slots;
  j["warmup"] = s.warmup;
  j["A_bar"] = s.A_bar;
  j["alpha"] = s.alpha;
  j["mean_q_h"] = s.mean_q_h;
  j["mean_q_l"] = s.mean_q_l;
  j["tau_h"] = s.tau_h;
  j["tau_l"] = s.tau_l;
  j["tau_total"] = s.tau_total;
  j["backlog_tau_h"] = s.backlog_tau_h;
  j["backlog_tau_l"] = s.backlog_tau_l;
  j["peak_h"] = s.peak_h;
  j["peak_l"] = s.peak_l;
  j["outage_h"] = s.outage_h;
  j["outage_l"] = s.outage_l;
  j["stable_h"] = v.stable_h;
  j["stable_l"] = v.stable_l;
  j["slope_h"] = v.slope_h;
  j["slope_l"] = v.slope_l;
  return j;
}

inline std::vector<Scheme> parse_schemes(const std::string& s) {
  if (s == "mcsc") return {Scheme::mcsc};
  if (s == "time_sharing") return {Scheme::time_sharing};
  if (s == "both") return {Scheme::mcsc, Scheme::time_sharing};
  throw ConfigError("scheme must be mcsc, time_sharing or both, got '" + s + "'");
}

inline void write_operating_point(CsvRow& row, const OperatingPoint& op) {
  row << op.A_max << op.throughput_total << op.throughput_hc;
}

/// Runs one experiment. CSV goes to `csv`, JSON results (solve, queue-sim
/// summary) to `out`, progress to `err` when o.trace is set. Returns an exit
/// code for comparison-type commands; throws on errors.
inline int execute(const RunOptions& o, const SystemConfig& cfg, unsigned jobs, std::ostream& csv, std::ostream& out,
                   std::ostream& err) {
  CsvWriter w(csv);
  const double alpha = o.alpha.value_or(cfg.alpha);

  if (o.command == "solve") {
    SystemConfig c = cfg;
    c.alpha = alpha;
    validate(c);
    const auto b = derive_link_budget(c);
    ScaOptions opt;
    if (o.trace) {
      opt.on_iterate = [&err](const ScaIterate& it) {
        Json j{{"iteration", it.iteration},
               {"objective", it.objective},
               {"mu_h", {it.mu.mu_h[0], it.mu.mu_h[1], it.mu.mu_h[2]}},
               {"mu_l", it.mu.mu_l},
               {"p", allocation_json(it.p)}};
        err << j.dump() << '\n';
      };
    }
    const auto r = sca_solve(c, b, opt);
    if (!r.converged) throw ConvergenceError("SCA did not converge in " + std::to_string(r.iterations) + " iterations");
    out << solve_json(r).dump(2) << '\n';
    w.header({"alpha", "A_bar", "objective", "delta_h", "delta_l", "R_h", "R_l", "P_out_h", "P_out_l", "p_h_d",
              "p_h_r", "p_l_d", "p_l_r", "iterations"});
    w.row(CsvRow() << c.alpha << c.A_bar << r.objective << r.delta.hc << r.delta.lc << r.R.R_h << r.R.R_l
                   << r.outage.P_out_h << r.outage.P_out_l << r.p.p_h_d << r.p.p_h_r << r.p.p_l_d << r.p.p_l_r
                   << r.iterations);
    return kOk;
  }

  if (o.command == "feasibility") {
    const auto grid = parse_grid(o.alpha_grid);
    const auto rows = feasibility_region(cfg, grid, jobs);
    w.header({"alpha", "A_max", "throughput_total", "throughput_hc", "P_out_h", "P_out_l", "R_h", "R_l", "p_h_d",
              "p_h_r", "p_l_d", "p_l_r", "ts_A_max", "ts_throughput_total", "ts_throughput_hc", "ts_lambda"});
    for (const auto& r : rows) {
      const auto& m = r.mcsc;
      CsvRow row;
      row << m.alpha;
      write_operating_point(row, m);
      row << m.P_out_h << m.P_out_l << m.R_h << m.R_l << m.p.p_h_d << m.p.p_h_r << m.p.p_l_d << m.p.p_l_r;
      write_operating_point(row, r.time_sharing.op);
      row << r.time_sharing.lambda;
      w.row(row);
    }
    return kOk;
  }

  if (o.command == "blockage-sweep" || o.command == "misalignment-sweep") {
    const bool blockage = o.command == "blockage-sweep";
    const auto grid = parse_grid(blockage ? o.q_d_grid : o.sigma_grid);
    const auto rows = blockage ? blockage_sweep(cfg, grid, jobs) : misalignment_sweep(cfg, grid, jobs);
    w.header({blockage ? "q_d" : "sigma_m", "alpha_sum", "alpha_T", "P_out_h", "P_out_l", "throughput_a0",
              "throughput_aT", "throughput_hc_aT", "throughput_a1"});
    for (const auto& r : rows) {
      w.row(CsvRow() << r.value << r.alpha_sum << r.alpha_tradeoff << r.points[0].P_out_h << r.points[0].P_out_l
                     << r.points[0].throughput_total << r.points[1].throughput_total << r.points[1].throughput_hc
                     << r.points[2].throughput_total);
      if (o.trace) err << o.command << ' ' << format_double(r.value) << " done\n";
    }
    return kOk;
  }

  if (o.command == "strict-hc") {
    const auto grid = parse_grid(o.sigma_grid);
    const auto rows = strict_hc_sweep(cfg, grid, o.alpha_min, o.target, jobs);
    w.header({"sigma_m", "w_r", "G_R", "q_mr", "P_out_h", "P_out_l", "at_narrowest", "alpha_sum", "alpha_mcsc",
              "mcsc_total", "mcsc_hc", "ts_total", "ts_hc", "ts_lambda", "all_hc_total"});
    for (const auto& r : rows) {
      w.row(CsvRow() << r.sigma << r.beam.w_r << r.beam.G_R << r.beam.q_mr << r.mcsc.P_out_h << r.mcsc.P_out_l
                     << (r.beam.at_narrowest ? 1 : 0) << r.alpha_sum << r.mcsc.alpha << r.mcsc.throughput_total
                     << r.mcsc.throughput_hc << r.time_sharing.op.throughput_total
                     << r.time_sharing.op.throughput_hc << r.time_sharing.lambda << r.all_hc.throughput_total);
    }
    return kOk;
  }

  if (o.command == "queue-sim") {
    const auto schemes = parse_schemes(o.scheme);
    if (schemes.size() != 1) throw ConfigError("queue-sim takes a single scheme");
    SystemConfig c = cfg;
    c.alpha = alpha;
    validate(c);
    const auto b = derive_link_budget(c);
    const auto plan = operating_plan(c, alpha, schemes[0]);
    const auto t = simulate(c, b, plan, o.n_slots, o.seed);
    w.header({"slot", "arrivals", "q_h", "q_l", "xi_h", "xi_l"});
    for (std::size_t s = 0; s < t.q_h.size(); ++s) {
      w.row(CsvRow() << s << t.arrivals[s] << t.q_h[s] << t.q_l[s] << static_cast<int>(t.xi_h[s])
                     << static_cast<int>(t.xi_l[s]));
    }
    StabilityVerdict v;
    if (t.q_h.size() >= 100) v = stability_diagnostic(t);
    out << summary_json(t.summary, v).dump(2) << '\n';
    return kOk;
  }

  if (o.command == "delay-sweep") {
    const auto grid = parse_grid(o.alpha_grid);
    DelayOptions d{o.n_slots, o.replications, o.seed};
    w.header({"scheme", "alpha", "A_max", "tau_h", "tau_l", "tau_total", "backlog_tau_h", "backlog_tau_l", "peak_h",
              "peak_l", "outage_h", "outage_l", "slope_h", "slope_l", "stable", "replications"});
    for (auto s : parse_schemes(o.scheme)) {
      for (const auto& r : delay_sweep(cfg, grid, s, d, jobs)) {
        const auto& m = r.summary;
        w.row(CsvRow() << scheme_name(s) << r.alpha << r.A_max << m.tau_h << m.tau_l << m.tau_total
                       << m.backlog_tau_h << m.backlog_tau_l << m.peak_h << m.peak_l << m.outage_h << m.outage_l << r.verdict.slope_h << r.verdict.slope_l
                       << (r.verdict.stable() ? 1 : 0) << r.replications);
      }
    }
    return kOk;
  }

  if (o.command == "oracle-check") {
    if (o.n < 1 || o.grid < 1) throw ConfigError("oracle-check needs --n >= 1 and --grid >= 1");
    const auto cases = oracle_check(cfg, o.n, o.seed, o.grid, jobs);
    w.header({"case", "alpha", "A_bar", "q_d", "q_r", "sigma_md", "sigma_mr", "sca", "grid", "abs_diff",
              "tolerance", "sca_iterations", "trace_monotone", "pass"});
    int failures = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[i];
      failures += c.pass() ? 0 : 1;
      w.row(CsvRow() << i << c.config.alpha << c.config.A_bar << c.config.q_d << c.config.q_r << c.config.sigma_md
                     << c.config.sigma_mr << c.sca << c.grid << std::abs(c.sca - c.grid) << c.tolerance
                     << c.sca_iterations << (c.trace_monotone ? 1 : 0) << (c.pass() ? 1 : 0));
    }
    err << "oracle-check: " << cases.size() - failures << "/" << cases.size() << " comparisons passed\n";
    return failures == 0 ? kOk : kOracleMismatch;
  }

  throw ConfigError("unknown command '" + o.command + "'");
}

/// Runs an experiment and, if o.out is set, writes the CSV there plus
/// <out>.manifest.json. Without --out the CSV goes to `out`.
inline int run_experiment(const RunOptions& o, const SystemConfig& cfg, unsigned jobs, std::ostream& out,
                          std::ostream& err) {
  for (const auto& wmsg : validate(cfg)) err << "warning: " << wmsg << '\n';
  const auto t0 = std::chrono::steady_clock::now();
  if (o.out.empty()) {
    std::ostringstream json;
    std::ostringstream csv;
    const int code = execute(o, cfg, jobs, csv, json, err);
    out << json.str();
    if (o.command != "solve") out << csv.str();
    return code;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw ConfigError("cannot open output '" + o.out + "'");
  const int code = execute(o, cfg, jobs, file, out, err);
  file.close();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string config_text = to_config_text(cfg);
  Json m;
  m["tool"] = "thzris";
  m["version"] = THZRIS_VERSION;
  m["command"] = o.command;
  m["options"] = options_to_json(o);
  m["config"] = config_text;
  m["config_hash"] = hex64(fnv1a(config_text));
  m["seed"] = o.seed;
  m["replications"] = o.replications;
  m["outputs"] = {o.out};
  m["timestamp"] = utc_timestamp();
  m["wall_time_s"] = wall;
  m["exit_code"] = code;
  std::ofstream mf(o.out + ".manifest.json", std::ios::binary);
  if (!mf) throw ConfigError("cannot write manifest '" + o.out + ".manifest.json'");
  mf << m.dump(2) << '\n';
  return code;
}

/// Re-runs the experiment recorded in a manifest. The output path defaults
/// to the recorded one.
inline int replay(const std::string& manifest_path, const std::string& out_override, unsigned jobs, std::ostream& out,
                  std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest '" + manifest_path + "'");
  Json m;
  try {
    m = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed manifest: " + std::string(e.what()));
  }
  if (!m.contains("command") || !m.contains("options") || !m.contains("config")) {
    throw ConfigError("manifest lacks command, options or config");
  }
  RunOptions o;
  SystemConfig cfg;
  try {
    o = options_from_json(m.at("command").get<std::string>(), m.at("options"));
    std::istringstream text(m.at("config").get<std::string>());
    cfg = parse_config(text);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed manifest: " + std::string(e.what()));
  }
  o.out = out_override.empty() ? m.at("outputs").at(0).get<std::string>() : out_override;
  return run_experiment(o, cfg, jobs, out, err);
}

inline SystemConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  SystemConfig cfg = path.empty() ? SystemConfig{} : load_config(path);
  if (!overrides.empty()) {
    std::string text;
    for (const auto& kv : overrides) {
      if (kv.find('=') == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      text += kv + '\n';
    }
    std::istringstream in(text);
    cfg = parse_config(in, cfg);
  }
  return cfg;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-criticality superposition coding for RIS-assisted THz links"};
  app.require_subcommand(1);
  app.set_version_flag("--version", THZRIS_VERSION);

  RunOptions o;
  std::string config_path;
  std::vector<std::string> overrides;
  unsigned jobs = default_jobs();

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file; unspecified keys keep their defaults");
    sub->add_option("--set", overrides, "override one config key, key=value (repeatable)");
    sub->add_option("--out", o.out, "CSV output path; a manifest is written next to it");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--trace", o.trace, "diagnostics on stderr");
  };
  auto alpha_grid = [&](CLI::App* sub) {
    sub->add_option("--alpha-grid", o.alpha_grid, "start:step:end");
  };
  auto sigma_grid = [&](CLI::App* sub) {
    sub->add_option("--sigma-grid", o.sigma_grid, "start:step:end");
  };

  auto* solve = app.add_subcommand("solve", "optimal power allocation, JSON on stdout");
  common(solve);
  solve->add_option("--alpha", o.alpha, "HC share (default: config)");

  auto* feas = app.add_subcommand("feasibility", "max arrival rate versus alpha, MC-SC and time sharing");
  common(feas);
  alpha_grid(feas);

  auto* block = app.add_subcommand("blockage-sweep", "throughput at alpha = 0, alpha_T*, 1 versus q_d");
  common(block);
  block->add_option("--q-d-grid", o.q_d_grid, "start:step:end");

  auto* mis = app.add_subcommand("misalignment-sweep", "throughput at alpha = 0, alpha_T*, 1 versus sigma_m");
  common(mis);
  sigma_grid(mis);

  auto* strict = app.add_subcommand("strict-hc", "reflected-beam adaptation to an HC outage target");
  common(strict);
  sigma_grid(strict);
  strict->add_option("--alpha-min", o.alpha_min, "minimum HC share");
  strict->add_option("--target", o.target, "HC outage target");

  auto* qsim = app.add_subcommand("queue-sim", "one queue trace; CSV trace, JSON summary on stdout");
  common(qsim);
  qsim->add_option("--alpha", o.alpha, "HC share (default: config)");
  qsim->add_option("--scheme", o.scheme, "mcsc or time_sharing");
  qsim->add_option("--slots", o.n_slots, "number of slots")->check(CLI::PositiveNumber);

  auto* delay = app.add_subcommand("delay-sweep", "queueing delay and stability versus alpha");
  common(delay);
  alpha_grid(delay);
  delay->add_option("--scheme", o.scheme, "mcsc, time_sharing or both");
  delay->add_option("--slots", o.n_slots, "slots per replication")->check(CLI::PositiveNumber);
  delay->add_option("--replications", o.replications, "replications per point")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle-check", "SCA against exhaustive grid search on random scenarios");
  common(oracle);
  oracle->add_option("--n", o.n, "number of scenarios");
  oracle->add_option("--grid", o.grid, "grid resolution per axis");

  bool show_defaults = false;
  auto* config = app.add_subcommand("config", "configuration utilities");
  config->add_flag("--show-defaults", show_defaults, "print the default config file");
  config->add_option("--config", config_path, "config file to resolve and print");
  config->add_option("--set", overrides, "override one config key, key=value (repeatable)");

  std::string manifest;
  auto* rep = app.add_subcommand("replay", "re-run an experiment from its manifest");
  rep->add_option("manifest", manifest, "manifest JSON")->required();
  rep->add_option("--out", o.out, "output path (default: as recorded)");
  rep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (config->parsed()) {
      if (show_defaults) {
        out << default_config_text();
      } else {
        out << to_config_text(resolve_config(config_path, overrides));
      }
      return kOk;
    }
    if (rep->parsed()) return replay(manifest, o.out, jobs, out, err);
    o.command = app.get_subcommands().front()->get_name();
    return run_experiment(o, resolve_config(config_path, overrides), jobs, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << '\n';
    return kConvergenceError;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace thzris::cli

#endif
