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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run from ctest or directly; pass --jobs N to bound threads.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "support/oracles.hpp"
#include "thzris/cli.hpp"
#include "thzris/experiments.hpp"

using namespace thzris;
namespace fs = std::filesystem;

namespace {

unsigned g_jobs = default_jobs();

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "[x] ") << what;
  }
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

bool within(double x, double centre, double tol) { return std::abs(x - centre) <= tol; }

int g_failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) o.check(dt < budget_s, "runtime " + fmt(dt, 3) + " s < " + fmt(budget_s) + " s");
  if (!o.pass) ++g_failures;
  std::cout << "CRITERION " << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << " (" << fmt(dt, 3)
            << " s)\n    " << o.detail.str() << '\n'
            << std::flush;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "thzris");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

const SystemConfig kRef{};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--jobs") == 0) g_jobs = static_cast<unsigned>(std::stoul(argv[i + 1]));
  }

  criterion(1, "feasibility endpoints", 5.0, [](Outcome& o) {
    const auto rows = feasibility_region(kRef, {0.0, 1.0});
    const double t0 = rows[0].mcsc.throughput_total, t1 = rows[1].mcsc.throughput_total;
    o.check(within(t0, 4.4, 0.44), "alpha=0: " + fmt(t0) + " bit/s/Hz, want 4.4 +- 0.44");
    o.check(within(t1, 2.8, 0.28), "alpha=1: " + fmt(t1) + " bit/s/Hz, want 2.8 +- 0.28");
  });

  criterion(2, "tradeoff anchors", 60.0, [](Outcome& o) {
    const auto sum = alpha_sum_star(kRef);
    const auto tr = alpha_tradeoff_star(kRef, sum);
    const auto p_sum = mcsc_point(kRef, sum.alpha);
    const auto p_tr = mcsc_point(kRef, tr.alpha);
    const double hc_ratio = p_tr.throughput_hc / p_sum.throughput_hc;
    const double drop = 1.0 - p_tr.throughput_total / p_sum.throughput_total;
    o.check(within(sum.alpha, 0.28, 0.05), "alpha_sum* " + fmt(sum.alpha) + ", want 0.28 +- 0.05");
    o.check(within(tr.alpha, 0.62, 0.07), "alpha_T* " + fmt(tr.alpha) + ", want 0.62 +- 0.07");
    o.check(within(hc_ratio, 2.0, 0.2), "HC throughput ratio " + fmt(hc_ratio) + ", want 2 +- 10%");
    o.check(within(drop, 0.12, 0.05), "total drop " + fmt(100 * drop) + "%, want 12 +- 5 pp");
  });

  criterion(3, "blockage sweep", 0.0, [](Outcome& o) {
    const auto rows = blockage_sweep(kRef, {0.0, 0.5}, g_jobs);
    const double a0_lo = rows[0].points[0].throughput_total, a0_hi = rows[1].points[0].throughput_total;
    const double drop = 1.0 - rows[1].points[2].throughput_total / rows[0].points[2].throughput_total;
    o.check(within(a0_lo, 6.3, 0.63), "alpha=0, q_d=0: " + fmt(a0_lo) + ", want 6.3 +- 0.63");
    o.check(within(a0_hi, 3.2, 0.32), "alpha=0, q_d=0.5: " + fmt(a0_hi) + ", want 3.2 +- 0.32");
    o.check(within(drop, 0.074, 0.03), "alpha=1 drop " + fmt(100 * drop) + "%, want 7.4 +- 3 pp");
  });

  criterion(4, "strict-HC beamwidth adaptation", 0.0, [](Outcome& o) {
    const auto row = strict_hc_point(kRef, 0.14, 0.3, 0.05);
    const double vs_hc = row.mcsc.throughput_total / row.all_hc.throughput_total;
    const double vs_ts = row.mcsc.throughput_total / row.time_sharing.op.throughput_total;
    o.check(vs_hc >= 2.5, "MC-SC / alpha=1 = " + fmt(vs_hc) + ", want >= 2.5");
    o.check(vs_ts >= 1.25, "MC-SC / time sharing = " + fmt(vs_ts) + ", want >= 1.25");
    const auto& cfg = row.beam.config;
    double worst = std::abs(outage_probs(cfg, derive_link_budget(cfg)).P_out_h - 0.05);
    Rng rng(55);
    int tested = 0;
    while (tested < 50) {
      const SystemConfig c = random_scenario(kRef, rng);
      const auto b = derive_link_budget(c);
      const double direct_fail = outage_probs(c, b).P_out_l;
      const double floor = direct_fail * c.q_r;
      const double target = floor + (direct_fail - floor) * (0.05 + 0.9 * uniform01(rng));
      BeamAdaptation a;
      try {
        a = adapt_beamwidth(c, target);
      } catch (const InfeasibleError&) {
        continue;
      }
      if (a.at_narrowest) continue;
      ++tested;
      worst = std::max(worst, std::abs(outage_probs(a.config, derive_link_budget(a.config)).P_out_h - target));
    }
    o.check(worst <= 1e-6, "round-trip error " + fmt(worst, 3) + " over sigma=0.14 and 50 random pairs, want <= 1e-6");
  });

  criterion(5, "queueing delay and stability", 600.0, [](Outcome& o) {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    const DelayOptions d{20000, 20, 1};
    const auto mc = delay_sweep(kRef, grid, Scheme::mcsc, d, g_jobs);
    const auto ts = delay_sweep(kRef, grid, Scheme::time_sharing, d, g_jobs);
    const double tau_l0 = mc[0].summary.tau_l;
    o.check(within(tau_l0, 2.5, 0.5), "tau_l(alpha=0) " + fmt(tau_l0) + " slots, want 2.5 +- 0.5");
    const double lim_mc = stability_limit(mc), lim_ts = stability_limit(ts);
    o.check(within(lim_mc, 0.63, 0.05), "MC-SC stable up to alpha " + fmt(lim_mc) + ", want 0.63 +- 0.05");
    o.check(within(lim_ts, 0.18, 0.05), "time sharing stable up to alpha " + fmt(lim_ts) + ", want 0.18 +- 0.05");
    double best = std::numeric_limits<double>::infinity(), arg = std::nan("");
    for (const auto& r : mc) {
      if (!r.verdict.stable()) break;
      if (r.summary.tau_total < best) {
        best = r.summary.tau_total;
        arg = r.alpha;
      }
    }
    o.check(arg >= 0.30 && arg <= 0.48, "MC-SC delay minimum at alpha " + fmt(arg) + ", want in [0.30, 0.48]");
    o.detail << "; info: post-service backlog delay at alpha=0 " << fmt(mc[0].summary.backlog_tau_l) << " slots";
  });

  criterion(6, "optimizer oracle equivalence", 0.0, [](Outcome& o) {
    const auto cases = oracle_check(kRef, 50, 7, 500, g_jobs);
    int close = 0, monotone = 0, below = 0;
    double worst = 0;
    for (const auto& c : cases) {
      close += c.within_tolerance();
      monotone += c.trace_monotone;
      below += c.sca < c.grid - c.tolerance;
      worst = std::max(worst, std::abs(c.sca - c.grid) / (1 + std::abs(c.grid)));
    }
    o.check(close == 50, fmt(close) + "/50 within 1e-3 (1 + |grid|) of the 500x500 grid, worst " + fmt(worst, 3));
    o.check(monotone == 50, fmt(monotone) + "/50 objective traces nondecreasing");
    double refined = 0;
    for (const auto& c : cases) {
      const auto b = derive_link_budget(c.config);
      const double z = std::max(oracle::zoom_oracle(c.config, b, 120, 30).value, oracle::nested_oracle(c.config, b).value);
      refined = std::max(refined, std::abs(c.sca - z) / (1 + std::abs(z)));
    }
    o.detail << "; info: SCA below grid beyond tolerance in " << below << "/50, worst gap to refined oracle "
             << fmt(refined, 3);
  });

  criterion(7, "quadratic-transform tightness", 0.0, [](Outcome& o) {
    Rng rng(7);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto c = random_scenario(kRef, rng);
      const auto b = derive_link_budget(c);
      double w[4];
      for (double& x : w) x = -std::log(uniform01(rng) + 1e-300);
      const double s = w[0] + w[1] + w[2] + w[3];
      const PowerAllocation p{c.P_max * w[0] / s, c.P_max * w[1] / s, c.P_max * w[2] / s, c.P_max * w[3] / s};
      const auto mu = update_mu(p, b);
      for (std::size_t k = 0; k < 3; ++k) {
        const auto t = hc_terms(b, k, p);
        const double exact = t.signal / t.denominator;
        worst = std::max(worst, std::abs(quad_transform_bound(mu.mu_h[k], t) - exact) / exact);
      }
      const auto t = lc_terms(b, p);
      const double exact = t.signal / t.denominator;
      worst = std::max(worst, std::abs(quad_transform_bound(mu.mu_l, t) - exact) / exact);
    }
    o.check(worst <= 1e-9, "worst relative gap " + fmt(worst, 3) + " over 1000 pairs x 4 ratios, want <= 1e-9");
  });

  criterion(8, "distribution fidelity", 0.0, [](Outcome& o) {
    const auto b = derive_link_budget(kRef);
    Rng rng(derive_seed(8, {0}));
    const std::size_t n_ks = 100000;
    std::vector<double> rho(n_ks);
    for (auto& r : rho) r = fading_from_pointing(b, sample_pointing_error(kRef, rng)).rho_d;
    const double d = oracle::ks_statistic(rho, [&](double x) { return misalignment_cdf(x, b.A_d, b.gamma_ma_d); });
    const double crit = oracle::ks_critical(n_ks, 0.01);
    o.check(d < crit, "KS D = " + fmt(d) + " < " + fmt(crit) + " (1e5 samples, 1%)");

    const long n = 1000000;
    long ok_d = 0, ok_r = 0;
    const auto th = epsilon_threshold(b);
    for (long i = 0; i < n; ++i) {
      const auto beta = sample_blockage(kRef, rng);
      const auto e = sample_pointing_error(kRef, rng);
      ok_d += beta.direct && e.eps_d <= th.eps_d;
      ok_r += beta.ris && e.eps_r <= th.eps_r;
    }
    const double a_d = (1 - kRef.q_d) * (1 - b.q_md), a_r = (1 - kRef.q_r) * (1 - b.q_mr);
    const double e_d = double(ok_d) / n, e_r = double(ok_r) / n;
    o.check(within(e_d, a_d, oracle::binomial_3sigma(a_d, n)), "direct availability " + fmt(e_d, 6) + " vs " + fmt(a_d, 6));
    o.check(within(e_r, a_r, oracle::binomial_3sigma(a_r, n)), "RIS availability " + fmt(e_r, 6) + " vs " + fmt(a_r, 6));
  });

  criterion(9, "manifest replay determinism", 0.0, [](Outcome& o) {
    const auto dir = fs::temp_directory_path() / ("thzris_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string jobs = std::to_string(g_jobs);
    const std::vector<std::vector<std::string>> runs = {
        {"delay-sweep", "--scheme", "both", "--alpha-grid", "0:0.25:1", "--slots", "4000", "--replications", "3",
         "--seed", "42"},
        {"queue-sim", "--alpha", "0.4", "--slots", "5000", "--seed", "3"},
        {"feasibility"},
        {"strict-hc", "--sigma-grid", "0.06:0.04:0.14"},
        {"oracle-check", "--n", "4", "--grid", "200", "--seed", "9"},
    };
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto out = dir / ("run" + std::to_string(i) + ".csv");
      auto args = runs[i];
      args.insert(args.end(), {"--jobs", jobs, "--out", out.string()});
      const int code = run_cli(args);
      const auto again = dir / ("replay" + std::to_string(i) + ".csv");
      const int code2 = run_cli({"replay", out.string() + ".manifest.json", "--out", again.string(), "--jobs", "1"});
      const bool same = code == code2 && slurp(out) == slurp(again) && !slurp(out).empty();
      o.check(same, runs[i][0] + " replay " + (same ? "identical" : "differs"));
    }
    fs::remove_all(dir);
  });

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASS" : std::to_string(g_failures) + " CRITERIA FAIL") << '\n';
  return g_failures == 0 ? 0 : 1;
}
