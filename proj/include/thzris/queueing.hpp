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

#ifndef THZRIS_QUEUEING_HPP
#define THZRIS_QUEUEING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <variant>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "mcsc.hpp"
#include "optimizer.hpp"
#include "random.hpp"

namespace thzris {

/// Buffered packets; fractional when arrivals are split as a fluid.
struct QueueState {
  double Q_h = 0;
  double Q_l = 0;
  bool operator==(const QueueState&) const = default;
};

struct ClassArrivals {
  double hc = 0;
  double lc = 0;
};

/// Packets removed from each queue in a slot where that class is decoded.
struct ServiceAmounts {
  double hc = 0;
  double lc = 0;
};

/// Depart, then arrive: Q <- [Q - xi * service]^+ + arrivals.
inline QueueState step(const QueueState& s, const ClassArrivals& a, const DecodeOutcome& xi,
                       const ServiceAmounts& service) {
  QueueState n;
  n.Q_h = std::max(s.Q_h - (xi.hc ? service.hc : 0.0), 0.0) + a.hc;
  n.Q_l = std::max(s.Q_l - (xi.lc ? service.lc : 0.0), 0.0) + a.lc;
  return n;
}

/// Fluid split of A(t) into alpha A and (1 - alpha) A, service (T/M) R.
inline QueueState step(const QueueState& s, double arrivals, const DecodeOutcome& xi, const RateTargets& R,
                       const SystemConfig& cfg) {
  const double k = packets_per_bit(cfg);
  return step(s, {cfg.alpha * arrivals, (1.0 - cfg.alpha) * arrivals}, xi, {k * R.R_h, k * R.R_l});
}

/// Superposition coding: both messages in every slot, HC decoded first.
struct McscPlan {
  PowerAllocation p;
  RateTargets R;
};

/// Time sharing: a fraction `lambda` of each slot carries HC over both paths,
/// the rest carries LC on the direct path. No interference between phases.
struct TimeSharingPlan {
  PowerAllocation hc_phase;
  PowerAllocation lc_phase;
  RateTargets R;
  double lambda = 0;
};

using ServicePlan = std::variant<McscPlan, TimeSharingPlan>;

struct QueueSummary {
  long n_slots = 0;
  long warmup = 0;
  double A_bar = 0;
  double alpha = 0;
  double mean_q_h = 0;
  double mean_q_l = 0;
  double tau_h = 0;      // slots, Little's law; NaN when the class gets no traffic
  double tau_l = 0;
  double tau_total = 0;  // (E[Q_h] + E[Q_l]) / Ā
  double backlog_tau_h = 0;  // same, on the backlog left after service, before the slot's arrivals
  double backlog_tau_l = 0;
  double peak_h = 0;     // max_t Q_h(t) / (alpha Ā)
  double peak_l = 0;     // max_t Q_l(t) / ((1 - alpha) Ā)
  double outage_h = 0;   // empirical 1 - mean(xi_h)
  double outage_l = 0;
};

struct QueueTrace {
  std::vector<double> arrivals;
  std::vector<double> q_h;
  std::vector<double> q_l;
  std::vector<double> backlog_h;  // [Q - xi service]^+ before arrivals
  std::vector<double> backlog_l;
  std::vector<std::uint8_t> xi_h;
  std::vector<std::uint8_t> xi_l;
  QueueSummary summary;
};

inline double ratio_or_nan(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

/// Statistics over a trace. Means and delays skip the first 10% of slots;
/// peaks use the whole trace.
inline QueueSummary summarize(const QueueTrace& t, double alpha, double A_bar) {
  QueueSummary s;
  s.n_slots = static_cast<long>(t.q_h.size());
  s.warmup = s.n_slots / 10;
  s.A_bar = A_bar;
  s.alpha = alpha;
  const bool has_backlog = t.backlog_h.size() == t.q_h.size() && t.backlog_l.size() == t.q_l.size();
  double sum_h = 0, sum_l = 0, max_h = 0, max_l = 0, ok_h = 0, ok_l = 0, back_h = 0, back_l = 0;
  for (long i = 0; i < s.n_slots; ++i) {
    if (i >= s.warmup) {
      sum_h += t.q_h[i];
      sum_l += t.q_l[i];
      if (has_backlog) {
        back_h += t.backlog_h[i];
        back_l += t.backlog_l[i];
      }
    }
    max_h = std::max(max_h, t.q_h[i]);
    max_l = std::max(max_l, t.q_l[i]);
    ok_h += t.xi_h[i];
    ok_l += t.xi_l[i];
  }
  const double counted = static_cast<double>(s.n_slots - s.warmup);
  s.mean_q_h = counted > 0 ? sum_h / counted : 0.0;
  s.mean_q_l = counted > 0 ? sum_l / counted : 0.0;
  s.tau_h = ratio_or_nan(s.mean_q_h, alpha * A_bar);
  s.tau_l = ratio_or_nan(s.mean_q_l, (1.0 - alpha) * A_bar);
  s.tau_total = ratio_or_nan(s.mean_q_h + s.mean_q_l, A_bar);
  if (has_backlog && counted > 0) {
    s.backlog_tau_h = ratio_or_nan(back_h / counted, alpha * A_bar);
    s.backlog_tau_l = ratio_or_nan(back_l / counted, (1.0 - alpha) * A_bar);
  } else {
    s.backlog_tau_h = s.backlog_tau_l = std::numeric_limits<double>::quiet_NaN();
  }
  s.peak_h = ratio_or_nan(max_h, alpha * A_bar);
  s.peak_l = ratio_or_nan(max_l, (1.0 - alpha) * A_bar);
  if (s.n_slots > 0) {
    s.outage_h = 1.0 - ok_h / static_cast<double>(s.n_slots);
    s.outage_l = 1.0 - ok_l / static_cast<double>(s.n_slots);
  }
  return s;
}

/// Slot-by-slot simulation. Per slot: A(t) ~ Poisson(Ā), blockage and
/// pointing errors drawn fresh, decode against the plan's targets, then
/// step(). Identical (cfg, plan, seed) give identical traces.
inline QueueTrace simulate(const SystemConfig& cfg, const LinkBudget& b, const ServicePlan& plan, long n_slots,
                           std::uint64_t seed) {
  if (n_slots < 1) throw ConfigError("simulate needs n_slots >= 1");
  Rng rng(seed);
  std::poisson_distribution<long> poisson(cfg.A_bar > 0.0 ? cfg.A_bar : 1.0);
  const double k = packets_per_bit(cfg);

  QueueTrace t;
  t.arrivals.reserve(n_slots);
  t.q_h.reserve(n_slots);
  t.q_l.reserve(n_slots);
  t.backlog_h.reserve(n_slots);
  t.backlog_l.reserve(n_slots);
  t.xi_h.reserve(n_slots);
  t.xi_l.reserve(n_slots);

  ServiceAmounts service;
  if (const auto* m = std::get_if<McscPlan>(&plan)) {
    service = {k * m->R.R_h, k * m->R.R_l};
  } else {
    const auto& ts = std::get<TimeSharingPlan>(plan);
    service = {ts.lambda * k * ts.R.R_h, (1.0 - ts.lambda) * k * ts.R.R_l};
  }

  QueueState state;
  for (long slot = 0; slot < n_slots; ++slot) {
    const long a = cfg.A_bar > 0.0 ? poisson(rng) : 0;
    const auto beta = sample_blockage(cfg, rng);
    const auto eps = sample_pointing_error(cfg, rng);

    DecodeOutcome xi;
    if (const auto* m = std::get_if<McscPlan>(&plan)) {
      xi = decode(b, beta, eps, m->p, m->R);
    } else {
      const auto& ts = std::get<TimeSharingPlan>(plan);
      const auto fading = fading_from_pointing(b, eps);
      const auto g = channel_gains(b, beta, fading.rho_d, fading.rho_r);
      xi.hc = shannon_rate(b.bandwidth, sinr_hc(g, ts.hc_phase, b.sigma_n2)) >= ts.R.R_h;
      xi.lc = shannon_rate(b.bandwidth, snr_lc(g, ts.lc_phase, b.sigma_n2)) >= ts.R.R_l;
    }

    ClassArrivals split;
    if (cfg.arrival_split == ArrivalSplit::binomial && a > 0) {
      std::binomial_distribution<long> thin(a, cfg.alpha);
      const long hc = thin(rng);
      split = {static_cast<double>(hc), static_cast<double>(a - hc)};
    } else {
      split = {cfg.alpha * static_cast<double>(a), (1.0 - cfg.alpha) * static_cast<double>(a)};
    }
    const QueueState backlog = step(state, {0.0, 0.0}, xi, service);
    state = step(state, split, xi, service);
    t.backlog_h.push_back(backlog.Q_h);
    t.backlog_l.push_back(backlog.Q_l);

    t.arrivals.push_back(static_cast<double>(a));
    t.q_h.push_back(state.Q_h);
    t.q_l.push_back(state.Q_l);
    t.xi_h.push_back(xi.hc ? 1 : 0);
    t.xi_l.push_back(xi.lc ? 1 : 0);
  }
  t.summary = summarize(t, cfg.alpha, cfg.A_bar);
  return t;
}

inline QueueTrace simulate(const SystemConfig& cfg, const LinkBudget& b, const SolveResult& solve, long n_slots,
                           std::uint64_t seed) {
  return simulate(cfg, b, ServicePlan{McscPlan{solve.p, solve.R}}, n_slots, seed);
}

struct StabilityVerdict {
  bool stable_h = true;
  bool stable_l = true;
  double slope_h = 0;  // packets/slot^2
  double slope_l = 0;
  double slope_tol = 0;

  bool stable() const { return stable_h && stable_l; }
};

namespace detail {

/// Least-squares slope of window means over the second half of the series.
inline double tail_slope(const std::vector<double>& q) {
  const std::size_t n = q.size();
  const std::size_t start = n / 2;
  const std::size_t half = n - start;
  const std::size_t window = std::max<std::size_t>(1, half / 50);
  std::vector<double> xs, ys;
  for (std::size_t w = start; w + window <= n; w += window) {
    double sum = 0;
    for (std::size_t i = w; i < w + window; ++i) sum += q[i];
    xs.push_back(static_cast<double>(w) + 0.5 * static_cast<double>(window - 1));
    ys.push_back(sum / static_cast<double>(window));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Mean-rate stability heuristic: a queue is declared unstable when the
/// windowed mean over the last half of the trace grows faster than
/// 1e-3 Ā packets per slot.
inline StabilityVerdict stability_diagnostic(const std::vector<double>& q_h, const std::vector<double>& q_l,
                                             double A_bar) {
  if (q_h.size() < 100 || q_l.size() < 100) {
    throw InsufficientDataError("stability diagnostic needs at least 100 slots");
  }
  StabilityVerdict v;
  v.slope_tol = 1e-3 * A_bar;
  v.slope_h = detail::tail_slope(q_h);
  v.slope_l = detail::tail_slope(q_l);
  v.stable_h = !(v.slope_h > v.slope_tol);
  v.stable_l = !(v.slope_l > v.slope_tol);
  return v;
}

inline StabilityVerdict stability_diagnostic(const QueueTrace& t) {
  return stability_diagnostic(t.q_h, t.q_l, t.summary.A_bar);
}

}  // namespace thzris

#endif
