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

#ifndef THZRIS_MCSC_HPP
#define THZRIS_MCSC_HPP

#include <cmath>
#include <numbers>

#include "channel.hpp"
#include "config.hpp"

namespace thzris {

/// Transmit powers in W for the HC/LC messages on the beams towards the UE
/// (direct) and towards the RIS.
struct PowerAllocation {
  double p_h_d = 0;
  double p_h_r = 0;
  double p_l_d = 0;
  double p_l_r = 0;

  double total() const { return p_h_d + p_h_r + p_l_d + p_l_r; }
  bool operator==(const PowerAllocation&) const = default;
};

/// Target rates in bit/s.
struct RateTargets {
  double R_h = 0;
  double R_l = 0;
};

struct OutageProbs {
  double P_out_h = 0;
  double P_out_l = 0;
};

inline double sinr_hc(const ChannelGains& g, const PowerAllocation& p, double sigma_n2) {
  return (g.direct * p.p_h_d + g.ris * p.p_h_r) / (g.direct * p.p_l_d + g.ris * p.p_l_r + sigma_n2);
}

/// Valid only after the HC message has been cancelled.
inline double snr_lc(const ChannelGains& g, const PowerAllocation& p, double sigma_n2) {
  return (g.direct * p.p_l_d + g.ris * p.p_l_r) / sigma_n2;
}

inline double sinr_hc(const LinkBudget& b, const BlockageState& beta, double rho_d, double rho_r,
                      const PowerAllocation& p) {
  return sinr_hc(channel_gains(b, beta, rho_d, rho_r), p, b.sigma_n2);
}

inline double snr_lc(const LinkBudget& b, const BlockageState& beta, double rho_d, double rho_r,
                     const PowerAllocation& p) {
  return snr_lc(channel_gains(b, beta, rho_d, rho_r), p, b.sigma_n2);
}

inline double shannon_rate(double bandwidth, double sinr) { return bandwidth * std::log2(1.0 + sinr); }

struct DecodeOutcome {
  bool hc = false;
  bool lc = false;
};

/// Successive decoding, HC first. LC succeeds only if HC was decoded and
/// cancelled and the post-cancellation rate supports R_l.
inline DecodeOutcome decode(const LinkBudget& b, const BlockageState& beta, const PointingError& eps,
                            const PowerAllocation& p, const RateTargets& targets) {
  const auto fading = fading_from_pointing(b, eps);
  const auto g = channel_gains(b, beta, fading.rho_d, fading.rho_r);
  DecodeOutcome out;
  out.hc = shannon_rate(b.bandwidth, sinr_hc(g, p, b.sigma_n2)) >= targets.R_h;
  out.lc = out.hc && shannon_rate(b.bandwidth, snr_lc(g, p, b.sigma_n2)) >= targets.R_l;
  return out;
}

/// Pointing-error displacements at which the collected power halves.
struct PointingThreshold {
  double eps_d = 0;
  double eps_r = 0;
};

inline PointingThreshold epsilon_threshold(const LinkBudget& b) {
  const double k = std::sqrt(std::log(std::numbers::sqrt2));
  return {k * b.w_eq_d, k * b.w_eq_r};
}

/// Per-path availability (unblocked and within the half-power threshold),
/// with the two paths treated independently for the HC message.
inline OutageProbs outage_probs(const SystemConfig& cfg, const LinkBudget& b) {
  const double direct_fail = 1.0 - (1.0 - cfg.q_d) * (1.0 - b.q_md);
  const double ris_fail = 1.0 - (1.0 - cfg.q_r) * (1.0 - b.q_mr);
  return {direct_fail * ris_fail, direct_fail};
}

}  // namespace thzris

#endif
