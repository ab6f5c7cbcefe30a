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

#ifndef THZRIS_EXPERIMENTS_HPP
#define THZRIS_EXPERIMENTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "mcsc.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "queueing.hpp"
#include "random.hpp"
#include "search.hpp"

namespace thzris {

/// One point of a throughput/reliability curve. Throughputs are in bit/s/Hz
/// (Ā_max M / (T B)), rates in bit/s.
struct OperatingPoint {
  double alpha = 0;
  double A_max = 0;  // packets/slot
  double throughput_total = 0;
  double throughput_hc = 0;
  double P_out_h = 0;
  double P_out_l = 0;
  double R_h = 0;
  double R_l = 0;
  PowerAllocation p;
};

/// A_max is stored as throughput * (T B / M) so the normalisation identity
/// holds exactly.
inline OperatingPoint make_operating_point(const SystemConfig& cfg, double alpha, double A_max,
                                           const OutageProbs& out, const RateTargets& R,
                                           const PowerAllocation& p) {
  OperatingPoint op;
  const double k = traffic_scale(cfg);
  op.alpha = alpha;
  op.throughput_total = A_max / k;
  op.A_max = op.throughput_total * k;
  op.throughput_hc = alpha * op.throughput_total;
  op.P_out_h = out.P_out_h;
  op.P_out_l = out.P_out_l;
  op.R_h = R.R_h;
  op.R_l = R.R_l;
  op.p = p;
  return op;
}

inline OperatingPoint mcsc_point(const SystemConfig& cfg, double alpha, const ScaOptions& opt = {}) {
  const auto b = derive_link_budget(cfg);
  const auto r = max_arrival_solution(cfg, b, alpha, opt);
  return make_operating_point(cfg, alpha, r.objective, r.outage, r.R, r.p);
}

struct TimeSharingPoint {
  OperatingPoint op;
  double lambda = 0;  // fraction of each slot given to HC
  PowerAllocation hc_phase;
  PowerAllocation lc_phase;
  RateTargets R;  // per-phase rates
};

/// Time-sharing baseline. HC phase: all of P_max split between the two beams
/// to maximise the worst-case HC SINR over the three blockage states. LC
/// phase: all of P_max on the direct beam. The slot split lambda equalises
/// the normalised service rates s_h / alpha = s_l / (1 - alpha), which is
/// then Ā_max.
inline TimeSharingPoint time_sharing_point(const SystemConfig& cfg, double alpha) {
  const auto b = derive_link_budget(cfg);
  const auto out = outage_probs(cfg, b);
  const double P = cfg.P_max;
  auto hc_split = [P](double p_h_r) { return PowerAllocation{P - p_h_r, p_h_r, 0.0, 0.0}; };
  auto best = golden_section_max([&](double x) { return robust_sinr(b, hc_split(x)).hc_min(); }, 0.0, P, 1e-13 * P);

  TimeSharingPoint ts;
  ts.hc_phase = hc_split(best.x);
  ts.lc_phase = {0.0, 0.0, P, 0.0};
  ts.R = {hc_service_rate(ts.hc_phase, cfg, b), lc_service_rate(ts.lc_phase, cfg, b)};
  const double k = packets_per_bit(cfg);
  const double c_h = (1.0 - out.P_out_h) * k * ts.R.R_h;
  const double c_l = (1.0 - out.P_out_l) * k * ts.R.R_l;
  const double denom = alpha * c_l + (1.0 - alpha) * c_h;
  double A_max = 0.0;
  if (alpha == 0.0) {
    ts.lambda = 0.0;
    A_max = c_l;
  } else if (alpha == 1.0) {
    ts.lambda = 1.0;
    A_max = c_h;
  } else if (denom > 0.0) {
    ts.lambda = alpha * c_l / denom;
    A_max = c_h * c_l / denom;
  } else {
    ts.lambda = alpha;
  }
  ts.op = make_operating_point(cfg, alpha, A_max, out, ts.R, ts.hc_phase);
  return ts;
}

struct AlphaSearch {
  double alpha = 0;
  double A_max = 0;
  bool used_fallback = false;
};

/// Argmax of Ā_max(alpha) on [0, 1], tolerance 1e-3 in alpha.
inline AlphaSearch alpha_sum_star(const SystemConfig& cfg, const ScaOptions& opt = {}) {
  const auto b = derive_link_budget(cfg);
  auto r = argmax_scalar([&](double a) { return max_arrival_rate(cfg, b, a, opt); }, 0.0, 1.0);
  return {r.x, r.value, r.used_fallback};
}

/// Tradeoff point on [alpha_sum, 1]: maximises the total throughput
/// normalised by its peak plus the HC throughput normalised by its alpha = 1
/// value.
inline AlphaSearch alpha_tradeoff_star(const SystemConfig& cfg, const AlphaSearch& sum_star,
                                       const ScaOptions& opt = {}) {
  const auto b = derive_link_budget(cfg);
  const double a_peak = sum_star.A_max;
  const double a_one = max_arrival_rate(cfg, b, 1.0, opt);
  auto score = [&](double a) {
    const double A = max_arrival_rate(cfg, b, a, opt);
    return A / a_peak + a * A / a_one;
  };
  auto r = argmax_scalar(score, sum_star.alpha, 1.0);
  return {r.x, max_arrival_rate(cfg, b, r.x, opt), r.used_fallback};
}

inline AlphaSearch alpha_tradeoff_star(const SystemConfig& cfg, const ScaOptions& opt = {}) {
  return alpha_tradeoff_star(cfg, alpha_sum_star(cfg, opt), opt);
}

struct FeasibilityRow {
  OperatingPoint mcsc;
  TimeSharingPoint time_sharing;
};

inline std::vector<FeasibilityRow> feasibility_region(const SystemConfig& cfg, const std::vector<double>& alpha_grid,
                                                      unsigned jobs = 1) {
  return parallel_map(alpha_grid.size(), jobs, [&](std::size_t i) {
    return FeasibilityRow{mcsc_point(cfg, alpha_grid[i]), time_sharing_point(cfg, alpha_grid[i])};
  });
}

/// Operating points at alpha = 0, alpha_T* and 1 for one swept parameter value.
struct ThreeAlphaRow {
  double value = 0;
  double alpha_sum = 0;
  double alpha_tradeoff = 0;
  std::array<OperatingPoint, 3> points;
};

inline ThreeAlphaRow three_alpha_row(const SystemConfig& cfg, double value) {
  ThreeAlphaRow row;
  row.value = value;
  const auto sum = alpha_sum_star(cfg);
  const auto tradeoff = alpha_tradeoff_star(cfg, sum);
  row.alpha_sum = sum.alpha;
  row.alpha_tradeoff = tradeoff.alpha;
  row.points = {mcsc_point(cfg, 0.0), mcsc_point(cfg, tradeoff.alpha), mcsc_point(cfg, 1.0)};
  return row;
}

/// Direct-path blockage sweep; alpha_T* is recomputed at every grid point.
inline std::vector<ThreeAlphaRow> blockage_sweep(const SystemConfig& cfg, const std::vector<double>& q_d_grid,
                                                 unsigned jobs = 1) {
  return parallel_map(q_d_grid.size(), jobs, [&](std::size_t i) {
    SystemConfig c = cfg;
    c.q_d = q_d_grid[i];
    return three_alpha_row(c, q_d_grid[i]);
  });
}

/// Pointing-error scale applied as sigma_md = sigma, sigma_mr = 2 sigma.
inline SystemConfig with_misalignment(SystemConfig cfg, double sigma) {
  cfg.sigma_md = sigma;
  cfg.sigma_mr = 2.0 * sigma;
  return cfg;
}

inline std::vector<ThreeAlphaRow> misalignment_sweep(const SystemConfig& cfg, const std::vector<double>& sigma_grid,
                                                     unsigned jobs = 1) {
  return parallel_map(sigma_grid.size(), jobs, [&](std::size_t i) {
    return three_alpha_row(with_misalignment(cfg, sigma_grid[i]), sigma_grid[i]);
  });
}

struct BeamAdaptation {
  double w_r = 0;
  double G_R = 0;
  double w_eq_r = 0;
  double q_mr = 0;
  bool at_narrowest = false;  // target met with margin by the narrowest admissible beam
  SystemConfig config;        // input config with w_r replaced
};

namespace detail {

inline double reflected_equivalent_width(const LinkBudget& b, double w_r) {
  return equivalent_width(w_r, aperture_ratio(b.a_U, w_r));
}

}  // namespace detail

inline constexpr double kBeamRadiusMin = 1e-4;  // m
inline constexpr double kBeamRadiusMax = 10.0;  // m

/// Chooses the reflected-beam radius w_r so that the analytic HC outage
/// equals `target`: solve for q_mr, map to w_eq_r = 2 sigma_mr sqrt(log2(1/q_mr)),
/// and invert w_eq_r(w_r) by bisection. w_eq_r(w_r) has a single minimum
/// near w_r ~ a_U; only the wide-beam branch above it is searched, and its
/// monotonicity is checked on a sample grid first.
inline BeamAdaptation adapt_beamwidth(const SystemConfig& cfg, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw ConfigError("outage target must lie in (0, 1]");
  const auto b = derive_link_budget(cfg);
  const double direct_fail = 1.0 - (1.0 - cfg.q_d) * (1.0 - b.q_md);
  const double floor = direct_fail * cfg.q_r;
  if (floor > target) {
    throw InfeasibleError("HC outage target " + format_double(target) + " is below the blockage floor " +
                          format_double(floor) + " = P_out_l * q_r");
  }

  auto w_eq = [&](double w) { return detail::reflected_equivalent_width(b, w); };
  const auto narrowest = golden_section_max([&](double w) { return -w_eq(w); }, kBeamRadiusMin, kBeamRadiusMax, 1e-12);
  const double w_lo = narrowest.x;
  {
    double prev = w_eq(w_lo);
    for (int i = 1; i <= 400; ++i) {
      const double w = w_lo * std::pow(kBeamRadiusMax / w_lo, i / 400.0);
      const double cur = w_eq(w);
      if (cur < prev) throw std::logic_error("equivalent beamwidth is not monotone on the wide-beam branch");
      prev = cur;
    }
  }

  auto finish = [&](double w_r, bool at_narrowest) {
    BeamAdaptation a;
    a.config = cfg;
    a.config.w_r = w_r;
    const auto adapted = derive_link_budget(a.config);
    a.w_r = w_r;
    a.G_R = adapted.G_R;
    a.w_eq_r = adapted.w_eq_r;
    a.q_mr = adapted.q_mr;
    a.at_narrowest = at_narrowest;
    return a;
  };

  const double ris_fail = target / direct_fail;
  if (direct_fail == 0.0 || ris_fail >= 1.0) return finish(w_lo, true);
  const double q_mr = 1.0 - (1.0 - ris_fail) / (1.0 - cfg.q_r);
  if (!(q_mr > 0.0 && q_mr < 1.0)) {
    throw InfeasibleError("required RIS misdetection probability " + format_double(q_mr) +
                          " is outside (0, 1): blockage q_r alone sets the floor");
  }
  const double w_eq_req = 2.0 * cfg.sigma_mr * std::sqrt(std::log2(1.0 / q_mr));
  if (w_eq_req <= w_eq(w_lo)) return finish(w_lo, true);
  if (w_eq_req > w_eq(kBeamRadiusMax)) {
    throw InfeasibleError("required reflected beam is wider than " + format_double(kBeamRadiusMax) + " m");
  }
  double lo = w_lo, hi = kBeamRadiusMax;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (w_eq(mid) < w_eq_req ? lo : hi) = mid;
  }
  return finish(0.5 * (lo + hi), false);
}

struct StrictHcRow {
  double sigma = 0;
  BeamAdaptation beam;
  double alpha_sum = 0;
  TimeSharingPoint time_sharing;  // at alpha_min
  OperatingPoint mcsc;            // at max(alpha_min, alpha_sum*)
  OperatingPoint all_hc;          // alpha = 1
};

inline StrictHcRow strict_hc_point(const SystemConfig& cfg, double sigma, double alpha_min, double target) {
  StrictHcRow row;
  row.sigma = sigma;
  if (target >= 1.0) {
    // Vacuous target: keep the configured beam so the sweep matches the
    // plain misalignment sweep.
    const auto c = with_misalignment(cfg, sigma);
    const auto b = derive_link_budget(c);
    row.beam = {c.w_r, b.G_R, b.w_eq_r, b.q_mr, false, c};
  } else {
    row.beam = adapt_beamwidth(with_misalignment(cfg, sigma), target);
  }
  const auto& c = row.beam.config;
  row.alpha_sum = alpha_sum_star(c).alpha;
  row.time_sharing = time_sharing_point(c, alpha_min);
  row.mcsc = mcsc_point(c, std::max(alpha_min, row.alpha_sum));
  row.all_hc = mcsc_point(c, 1.0);
  return row;
}

inline std::vector<StrictHcRow> strict_hc_sweep(const SystemConfig& cfg, const std::vector<double>& sigma_grid,
                                                double alpha_min = 0.3, double target = 0.05, unsigned jobs = 1) {
  return parallel_map(sigma_grid.size(), jobs,
                      [&](std::size_t i) { return strict_hc_point(cfg, sigma_grid[i], alpha_min, target); });
}

enum class Scheme { mcsc, time_sharing };

inline const char* scheme_name(Scheme s) { return s == Scheme::mcsc ? "mcsc" : "time_sharing"; }

/// The queueing operating plan at HC share alpha. Both schemes' powers and
/// rates are independent of Ā.
inline ServicePlan operating_plan(const SystemConfig& cfg, double alpha, Scheme scheme) {
  if (scheme == Scheme::mcsc) {
    const auto b = derive_link_budget(cfg);
    const auto r = max_arrival_solution(cfg, b, alpha);
    return McscPlan{r.p, r.R};
  }
  const auto ts = time_sharing_point(cfg, alpha);
  return TimeSharingPlan{ts.hc_phase, ts.lc_phase, ts.R, ts.lambda};
}

struct DelayRow {
  double alpha = 0;
  Scheme scheme = Scheme::mcsc;
  double A_max = 0;
  int replications = 0;
  QueueSummary summary;  // replication means
  StabilityVerdict verdict;  // on the replication-averaged queue trajectories
};

struct DelayOptions {
  long n_slots = 20000;
  int replications = 20;
  std::uint64_t seed = 1;
};

/// Queue simulation at fixed Ā = cfg.A_bar for each alpha. Replication r of
/// grid point i uses the stream derive_seed(seed, {i, scheme, r}). The
/// stability verdict is taken on the average of Q(t) over replications, an
/// estimate of E[Q(t)].
inline DelayRow delay_point(const SystemConfig& cfg, double alpha, Scheme scheme, std::size_t index,
                            const DelayOptions& opt) {
  SystemConfig c = cfg;
  c.alpha = alpha;
  const auto b = derive_link_budget(c);
  const auto plan = operating_plan(c, alpha, scheme);

  DelayRow row;
  row.alpha = alpha;
  row.scheme = scheme;
  row.replications = opt.replications;
  row.A_max = scheme == Scheme::mcsc ? max_arrival_rate(c, b, alpha) : time_sharing_point(c, alpha).op.A_max;

  std::vector<double> mean_h(opt.n_slots, 0.0), mean_l(opt.n_slots, 0.0);
  QueueSummary acc;
  const double reps = static_cast<double>(opt.replications);
  for (int r = 0; r < opt.replications; ++r) {
    const auto seed = derive_seed(opt.seed, {index, static_cast<std::uint64_t>(scheme), static_cast<std::uint64_t>(r)});
    const auto t = simulate(c, b, plan, opt.n_slots, seed);
    for (long s = 0; s < opt.n_slots; ++s) {
      mean_h[s] += t.q_h[s] / reps;
      mean_l[s] += t.q_l[s] / reps;
    }
    const auto& s = t.summary;
    acc.n_slots = s.n_slots;
    acc.warmup = s.warmup;
    acc.A_bar = s.A_bar;
    acc.alpha = s.alpha;
    acc.mean_q_h += s.mean_q_h / reps;
    acc.mean_q_l += s.mean_q_l / reps;
    acc.tau_h += s.tau_h / reps;
    acc.tau_l += s.tau_l / reps;
    acc.tau_total += s.tau_total / reps;
    acc.backlog_tau_h += s.backlog_tau_h / reps;
    acc.backlog_tau_l += s.backlog_tau_l / reps;
    acc.peak_h += s.peak_h / reps;
    acc.peak_l += s.peak_l / reps;
    acc.outage_h += s.outage_h / reps;
    acc.outage_l += s.outage_l / reps;
  }
  row.summary = acc;
  row.verdict = stability_diagnostic(mean_h, mean_l, c.A_bar);
  return row;
}

inline std::vector<DelayRow> delay_sweep(const SystemConfig& cfg, const std::vector<double>& alpha_grid,
                                         Scheme scheme, const DelayOptions& opt = {}, unsigned jobs = 1) {
  return parallel_map(alpha_grid.size(), jobs,
                      [&](std::size_t i) { return delay_point(cfg, alpha_grid[i], scheme, i, opt); });
}

/// Random scenario around `base` for oracle and property checks.
inline SystemConfig random_scenario(const SystemConfig& base, Rng& rng) {
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  SystemConfig c = base;
  c.P_max = dbm_to_watt(u(0.0, 20.0));
  c.d_BU = u(8.0, 25.0);
  c.d_RU = u(2.0, 8.0);
  c.q_d = u(0.0, 0.6);
  c.q_r = u(0.0, 0.3);
  c.sigma_md = u(0.02, 0.2);
  c.sigma_mr = u(0.04, 0.4);
  c.w_r = u(0.3, 1.5);
  c.alpha = u(0.05, 0.95);
  c.A_bar = u(0.0, 1000.0);
  return c;
}

/// One SCA-versus-exhaustive-grid comparison.
struct OracleComparison {
  SystemConfig config;
  double sca = 0;
  double grid = 0;
  double tolerance = 0;  // 1e-3 (1 + |grid|)
  int sca_iterations = 0;
  bool trace_monotone = true;  // slack 1e-8
  bool within_tolerance() const { return std::abs(sca - grid) <= tolerance; }
  bool pass() const { return within_tolerance() && trace_monotone; }
};

inline bool nondecreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - slack) return false;
  }
  return true;
}

/// Case i draws its scenario from derive_seed(seed, {i}).
inline std::vector<OracleComparison> oracle_check(const SystemConfig& base, int n, std::uint64_t seed,
                                                  int n_grid = 500, unsigned jobs = 1) {
  return parallel_map(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    OracleComparison c;
    c.config = random_scenario(base, rng);
    const auto b = derive_link_budget(c.config);
    const auto s = sca_solve(c.config, b);
    const auto g = grid_oracle(c.config, b, n_grid);
    c.sca = s.objective;
    c.grid = g.objective;
    c.tolerance = 1e-3 * (1.0 + std::abs(g.objective));
    c.sca_iterations = s.iterations;
    c.trace_monotone = nondecreasing(s.objective_trace, 1e-8);
    return c;
  });
}

/// Largest alpha in the (increasing) grid such that every grid point up to
/// it is stable; NaN if the first point is already unstable.
inline double stability_limit(const std::vector<DelayRow>& rows) {
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    if (!r.verdict.stable()) break;
    last = r.alpha;
  }
  return last;
}

}  // namespace thzris

#endif
