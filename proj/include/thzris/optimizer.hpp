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

#ifndef THZRIS_OPTIMIZER_HPP
#define THZRIS_OPTIMIZER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "mcsc.hpp"
#include "parallel.hpp"
#include "search.hpp"

namespace thzris {

// Power allocation for superposition-coded HC/LC transmission.
//
// The HC rate must be decodable in each of the blockage states (0,1), (1,0)
// and (1,1) at the half-power fading thresholds; the LC rate only when the
// direct path is up (worst case over the RIS path, i.e. state (1,0)). The
// max-min stability gap problem is non-convex in the powers; sca_solve()
// replaces every SINR ratio S/D by its quadratic-transform lower bound
// 2 mu sqrt(S) - mu^2 D, tight at mu = sqrt(S) / D, and alternates mu updates
// with exact maximisation of the resulting concave surrogate.

inline constexpr std::array<BlockageState, 3> kHcBlockageStates = {
    BlockageState{false, true}, BlockageState{true, false}, BlockageState{true, true}};
inline constexpr BlockageState kLcBlockageState{true, false};

/// SINRs at the half-power fading thresholds for the three HC states and the LC state.
struct RobustSinrBounds {
  std::array<double, 3> hc{};
  double lc = 0;

  double hc_min() const { return std::min({hc[0], hc[1], hc[2]}); }
};

inline RobustSinrBounds robust_sinr(const LinkBudget& b, const PowerAllocation& p) {
  RobustSinrBounds r;
  for (std::size_t s = 0; s < kHcBlockageStates.size(); ++s) {
    r.hc[s] = sinr_hc(b, kHcBlockageStates[s], b.rho_th_d, b.rho_th_r, p);
  }
  r.lc = snr_lc(b, kLcBlockageState, b.rho_th_d, b.rho_th_r, p);
  return r;
}

inline double hc_service_rate(const PowerAllocation& p, const SystemConfig& cfg, const LinkBudget& b) {
  return shannon_rate(cfg.B, robust_sinr(b, p).hc_min());
}

inline double lc_service_rate(const PowerAllocation& p, const SystemConfig& cfg, const LinkBudget& b) {
  return shannon_rate(cfg.B, robust_sinr(b, p).lc);
}

/// Served-minus-arrived packet rates per slot, normalised by the class share.
struct StabilityGaps {
  double hc = 0;
  double lc = 0;

  double min() const { return std::min(hc, lc); }
};

/// A class that receives no traffic (alpha = 0 for HC, alpha = 1 for LC) is
/// vacuously stable and gets an infinite gap.
inline StabilityGaps stability_gaps(const RateTargets& R, const SystemConfig& cfg, const OutageProbs& out) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double k = packets_per_bit(cfg);
  StabilityGaps d;
  d.hc = cfg.alpha > 0.0 ? ((1.0 - out.P_out_h) * k * R.R_h - cfg.alpha * cfg.A_bar) / cfg.alpha : inf;
  d.lc = cfg.alpha < 1.0
             ? ((1.0 - out.P_out_l) * k * R.R_l - (1.0 - cfg.alpha) * cfg.A_bar) / (1.0 - cfg.alpha)
             : inf;
  return d;
}

/// Auxiliary quadratic-transform variables, one per HC state plus one for LC.
struct QuadTransformState {
  std::array<double, 3> mu_h{};
  double mu_l = 0;
};

/// Signal and interference-plus-noise terms of one SINR ratio.
struct RatioTerms {
  double signal = 0;
  double denominator = 0;
};

inline RatioTerms hc_terms(const LinkBudget& b, std::size_t state, const PowerAllocation& p) {
  const auto g = channel_gains(b, kHcBlockageStates[state], b.rho_th_d, b.rho_th_r);
  return {g.direct * p.p_h_d + g.ris * p.p_h_r, g.direct * p.p_l_d + g.ris * p.p_l_r + b.sigma_n2};
}

inline RatioTerms lc_terms(const LinkBudget& b, const PowerAllocation& p) {
  const auto g = channel_gains(b, kLcBlockageState, b.rho_th_d, b.rho_th_r);
  return {g.direct * p.p_l_d + g.ris * p.p_l_r, b.sigma_n2};
}

inline QuadTransformState update_mu(const PowerAllocation& p, const LinkBudget& b) {
  QuadTransformState mu;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto t = hc_terms(b, s, p);
    mu.mu_h[s] = std::sqrt(t.signal) / t.denominator;
  }
  const auto t = lc_terms(b, p);
  mu.mu_l = std::sqrt(t.signal) / t.denominator;
  return mu;
}

/// 2 mu sqrt(S) - mu^2 D; never above S / D, equal at mu = sqrt(S) / D.
inline double quad_transform_bound(double mu, const RatioTerms& t) {
  return 2.0 * mu * std::sqrt(t.signal) - mu * mu * t.denominator;
}

/// log2(1 + x) continued below x = 0 by its tangent, so the composition with
/// a concave SINR bound stays concave even where the bound goes negative.
inline double extended_log2_1p(double x) { return x >= 0.0 ? std::log2(1.0 + x) : x / std::numbers::ln2; }

struct SolveResult {
  PowerAllocation p;
  RateTargets R;
  StabilityGaps delta;
  OutageProbs outage;
  double objective = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  QuadTransformState mu;
};

/// Rates, gaps and objective of an allocation on the original problem.
inline SolveResult evaluate_allocation(const PowerAllocation& p, const SystemConfig& cfg, const LinkBudget& b,
                                       const OutageProbs& out) {
  SolveResult r;
  r.p = p;
  r.outage = out;
  const auto s = robust_sinr(b, p);
  r.R = {shannon_rate(cfg.B, s.hc_min()), shannon_rate(cfg.B, s.lc)};
  r.delta = stability_gaps(r.R, cfg, out);
  r.objective = r.delta.min();
  return r;
}

struct SubproblemOptions {
  double x_tol_rel = 1e-13;  // golden-section interval, relative to P_max
  int max_inner = 200;       // golden-section iterations per dimension
};

class SubproblemConvergenceError : public ConvergenceError {
public:
  SubproblemConvergenceError(const std::string& what, PowerAllocation best)
      : ConvergenceError(what), best_(best) {}
  const PowerAllocation& best_iterate() const { return best_; }

private:
  PowerAllocation best_;
};

namespace detail {

struct Surrogate {
  const SystemConfig& cfg;
  const LinkBudget& b;
  const OutageProbs& out;
  const QuadTransformState& mu;

  struct Value {
    double gamma_h;
    double gamma_l;
    double objective;
  };

  Value at(const PowerAllocation& p) const {
    double gh = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < 3; ++s) gh = std::min(gh, quad_transform_bound(mu.mu_h[s], hc_terms(b, s, p)));
    const double gl = quad_transform_bound(mu.mu_l, lc_terms(b, p));
    RateTargets R{cfg.B * extended_log2_1p(gh), cfg.B * extended_log2_1p(gl)};
    return {gh, gl, stability_gaps(R, cfg, out).min()};
  }
};

inline PowerAllocation simplex_point(double p_max, double p_h_r, double p_h_d) {
  PowerAllocation p;
  p.p_h_r = p_h_r;
  p.p_h_d = p_h_d;
  p.p_l_d = std::max(0.0, p_max - p_h_r - p_h_d);
  p.p_l_r = 0.0;
  return p;
}

}  // namespace detail

/// Maximises the concave surrogate for fixed mu over the simplex
/// {p >= 0, sum p = P_max, p_l_r = 0} by nested golden-section search: the
/// outer search is over p_h_r, the inner over p_h_d with the remainder on
/// p_l_d. Partial maximisation of a concave function over a convex set keeps
/// the outer function concave, so both searches are exact up to x_tol.
/// When `incumbent` is given, it is returned instead if the search finds
/// nothing better.
inline SolveResult solve_subproblem(const QuadTransformState& mu, const SystemConfig& cfg, const LinkBudget& b,
                                    const SubproblemOptions& opt = {},
                                    const PowerAllocation* incumbent = nullptr) {
  const auto out = outage_probs(cfg, b);
  const detail::Surrogate sur{cfg, b, out, mu};
  const double P = cfg.P_max;
  const double tol = opt.x_tol_rel * P;
  bool converged = true;

  auto inner = [&](double p_h_r) {
    auto r = golden_section_max(
        [&](double p_h_d) { return sur.at(detail::simplex_point(P, p_h_r, p_h_d)).objective; }, 0.0,
        std::max(0.0, P - p_h_r), tol, opt.max_inner);
    converged = converged && r.converged;
    return r;
  };
  auto outer = golden_section_max([&](double p_h_r) { return inner(p_h_r).value; }, 0.0, P, tol, opt.max_inner);
  auto in = inner(outer.x);
  PowerAllocation best = detail::simplex_point(P, outer.x, in.x);
  auto value = sur.at(best);
  converged = converged && outer.converged;

  if (incumbent) {
    auto inc = sur.at(*incumbent);
    if (inc.objective >= value.objective) {
      best = *incumbent;
      value = inc;
    }
  }
  if (!converged) {
    throw SubproblemConvergenceError("subproblem search did not reach tolerance in " +
                                         std::to_string(opt.max_inner) + " iterations",
                                     best);
  }

  SolveResult r;
  r.p = best;
  r.mu = mu;
  r.outage = out;
  r.R = {cfg.B * std::log2(1.0 + std::max(value.gamma_h, 0.0)), cfg.B * std::log2(1.0 + std::max(value.gamma_l, 0.0))};
  r.delta = stability_gaps(r.R, cfg, out);
  r.objective = value.objective;
  r.iterations = 1;
  r.converged = true;
  return r;
}

struct ScaIterate {
  int iteration = 0;
  double objective = 0;
  QuadTransformState mu;
  PowerAllocation p;
};

struct ScaOptions {
  double tol = 1e-6;
  int max_iter = 200;
  SubproblemOptions sub;
  std::function<void(const ScaIterate&)> on_iterate;  // diagnostics hook
};

inline PowerAllocation default_initial_allocation(const SystemConfig& cfg) {
  return {cfg.P_max / 3.0, cfg.P_max / 3.0, cfg.P_max / 3.0, 0.0};
}

/// Alternating mu update / surrogate maximisation. The trace holds the true
/// objective at the initial point and after every iteration; it is
/// nondecreasing because each surrogate is a tight lower bound at the
/// incumbent. Convergence: relative change of the Ā-independent weighted
/// service rate (objective + Ā) below tol.
inline SolveResult sca_solve(const SystemConfig& cfg, const LinkBudget& b, const PowerAllocation& init,
                             const ScaOptions& opt = {}) {
  const auto out = outage_probs(cfg, b);
  auto current = evaluate_allocation(init, cfg, b, out);
  std::vector<double> trace{current.objective};
  QuadTransformState mu{};
  bool converged = false;
  int it = 0;
  while (it < opt.max_iter) {
    ++it;
    mu = update_mu(current.p, b);
    auto sub = solve_subproblem(mu, cfg, b, opt.sub, &current.p);
    auto next = evaluate_allocation(sub.p, cfg, b, out);
    trace.push_back(next.objective);
    if (opt.on_iterate) opt.on_iterate({it, next.objective, mu, next.p});
    const double scale = std::abs(next.objective + cfg.A_bar);
    const double change = std::abs(next.objective - current.objective);
    current = next;
    if (change <= opt.tol * scale || !std::isfinite(scale)) {
      converged = true;
      break;
    }
  }
  current.objective_trace = std::move(trace);
  current.iterations = it;
  current.converged = converged;
  current.mu = mu;
  return current;
}

inline SolveResult sca_solve(const SystemConfig& cfg, const LinkBudget& b, const ScaOptions& opt = {}) {
  return sca_solve(cfg, b, default_initial_allocation(cfg), opt);
}

/// Exhaustive search of the original objective over the barycentric grid
/// p = P_max (j, i, n - i - j) / n on (p_h_d, p_h_r, p_l_d), p_l_r = 0.
/// Ties prefer the larger HC rate, then the lower (i, j) index.
inline SolveResult grid_oracle(const SystemConfig& cfg, const LinkBudget& b, int n_grid, unsigned jobs = 1) {
  if (n_grid < 1) throw ConfigError("grid_oracle needs n_grid >= 1");
  const auto out = outage_probs(cfg, b);
  const double P = cfg.P_max;
  const double n = static_cast<double>(n_grid);

  struct RowBest {
    SolveResult r;
    int j = 0;
  };
  auto better = [](const SolveResult& a, const SolveResult& c) {
    if (a.objective != c.objective) return a.objective > c.objective;
    return a.R.R_h > c.R.R_h;
  };
  auto rows = parallel_map(static_cast<std::size_t>(n_grid) + 1, jobs, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    RowBest best;
    for (int j = 0; j + i <= n_grid; ++j) {
      PowerAllocation p{P * j / n, P * i / n, P * (n_grid - i - j) / n, 0.0};
      auto r = evaluate_allocation(p, cfg, b, out);
      if (j == 0 || better(r, best.r)) {
        best.r = r;
        best.j = j;
      }
    }
    return best;
  });
  std::size_t bi = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (better(rows[i].r, rows[bi].r)) bi = i;
  }
  auto result = rows[bi].r;
  const long points = static_cast<long>(n_grid + 1) * (n_grid + 2) / 2;
  result.iterations = static_cast<int>(std::min<long>(points, std::numeric_limits<int>::max()));
  result.converged = true;
  result.objective_trace = {result.objective};
  return result;
}

/// Largest mean arrival rate (packets/slot) that both queues can sustain at
/// HC share alpha. The optimal powers do not depend on Ā, so this is the SCA
/// optimum of the weighted service rates at Ā = 0.
inline SolveResult max_arrival_solution(const SystemConfig& cfg, const LinkBudget& b, double alpha,
                                        const ScaOptions& opt = {}) {
  SystemConfig c = cfg;
  c.alpha = alpha;
  c.A_bar = 0.0;
  return sca_solve(c, b, opt);
}

inline double max_arrival_rate(const SystemConfig& cfg, const LinkBudget& b, double alpha,
                               const ScaOptions& opt = {}) {
  return max_arrival_solution(cfg, b, alpha, opt).objective;
}

}  // namespace thzris

#endif
