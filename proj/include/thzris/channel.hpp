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

#ifndef THZRIS_CHANNEL_HPP
#define THZRIS_CHANNEL_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace thzris {

/// Deterministic link quantities derived from a SystemConfig. All gains are
/// linear amplitudes or power fractions; lengths in metres.
struct LinkBudget {
  double eta_d = 0;       // direct-path amplitude gain
  double eta_r = 0;       // RIS-path amplitude gain
  double w_d = 0;         // direct-beam radius at the UE
  double w_ris = 0;       // BS-beam radius on the RIS surface
  double a_U = 0;         // UE effective aperture radius
  double a_RIS = 0;       // RIS effective aperture radius
  double A_d = 0;         // peak collected fractions
  double A_r = 0;
  double A_RIS = 0;
  double w_eq_d = 0;      // equivalent beamwidths
  double w_eq_r = 0;
  double gamma_ma_d = 0;  // misalignment shape parameters w_eq / (2 sigma)
  double gamma_ma_r = 0;
  double q_md = 0;        // misdetection probabilities (1/2)^(gamma^2)
  double q_mr = 0;
  double rho_th_d = 0;    // half-power fading thresholds
  double rho_th_r = 0;
  double G_R = 0;         // reflected-beam gain
  double sigma_n2 = 0;    // noise power N0 * B, W
  double bandwidth = 0;   // Hz, carried along for rate computations

  /// Peak fraction of the RIS path, A_RIS * A_r.
  double A_ris_path() const { return A_RIS * A_r; }

  bool operator==(const LinkBudget&) const = default;
};

/// Gaussian-beam radius at distance d for antenna gain G (from G = 8 d^2 / w^2).
inline double beam_radius(double gain, double distance) {
  return std::sqrt(8.0) * distance / std::sqrt(gain);
}

/// Gain of a Gaussian beam of radius w at distance d.
inline double beam_gain(double radius, double distance) {
  return 8.0 * distance * distance / (radius * radius);
}

/// v = sqrt(pi) a / (sqrt(2) w) for a receiver of radius a in a beam of radius w.
inline double aperture_ratio(double aperture, double radius) {
  return std::sqrt(std::numbers::pi) * aperture / (std::sqrt(2.0) * radius);
}

/// Peak collected power fraction erf(v)^2.
inline double collected_fraction(double v) {
  const double e = std::erf(v);
  return e * e;
}

/// w_eq^2 / w^2 = sqrt(pi) erf(v) / (2 v exp(-v^2)); tends to 1 as v -> 0.
/// std::erf (glibc) is accurate to within a couple of ulp, well below 1e-12.
inline double equivalent_width_factor(double v) {
  if (v < 1e-8) return 1.0 + 2.0 * v * v / 3.0;
  return std::sqrt(std::numbers::pi) * std::erf(v) / (2.0 * v * std::exp(-v * v));
}

inline double equivalent_width(double radius, double v) {
  return radius * std::sqrt(equivalent_width_factor(v));
}

inline double misdetection_probability(double gamma_ma) { return std::pow(0.5, gamma_ma * gamma_ma); }

inline LinkBudget derive_link_budget(const SystemConfig& cfg) {
  validate(cfg);
  const double c = kSpeedOfLight;
  const double lambda = c / cfg.f;
  const double four_pi_f = 4.0 * std::numbers::pi * cfg.f;

  LinkBudget b;
  b.bandwidth = cfg.B;
  b.sigma_n2 = cfg.N0 * cfg.B;
  b.G_R = beam_gain(cfg.w_r, cfg.d_RU);

  b.eta_d = std::sqrt(cfg.G_B * cfg.G_U) * c / (four_pi_f * cfg.d_BU) * std::exp(-0.5 * cfg.k_a * cfg.d_BU);
  b.eta_r = std::sqrt(cfg.G_B * b.G_R * cfg.G_U) * c / (four_pi_f * cfg.d_BR * cfg.d_RU) *
            std::exp(-0.5 * cfg.k_a * (cfg.d_BR + cfg.d_RU));

  b.w_d = beam_radius(cfg.G_B, cfg.d_BU);
  b.w_ris = beam_radius(cfg.G_B, cfg.d_BR);
  b.a_U = c * std::sqrt(cfg.G_U) / (2.0 * std::numbers::pi * cfg.f);
  b.a_RIS = lambda / 4.0 * std::sqrt(static_cast<double>(cfg.N_R));

  const double v_d = aperture_ratio(b.a_U, b.w_d);
  const double v_r = aperture_ratio(b.a_U, cfg.w_r);
  const double v_ris = aperture_ratio(b.a_RIS, b.w_ris);
  b.A_d = collected_fraction(v_d);
  b.A_r = collected_fraction(v_r);
  b.A_RIS = collected_fraction(v_ris);

  b.w_eq_d = equivalent_width(b.w_d, v_d);
  b.w_eq_r = equivalent_width(cfg.w_r, v_r);
  b.gamma_ma_d = b.w_eq_d / (2.0 * cfg.sigma_md);
  b.gamma_ma_r = b.w_eq_r / (2.0 * cfg.sigma_mr);
  b.q_md = misdetection_probability(b.gamma_ma_d);
  b.q_mr = misdetection_probability(b.gamma_ma_r);
  b.rho_th_d = b.A_d / 2.0;
  b.rho_th_r = b.A_ris_path() / 2.0;
  return b;
}

// Misalignment fading rho on [0, A] has CDF (x / A)^(gamma^2).

inline void check_fading_support(double x, double peak, double gamma_ma) {
  if (!(gamma_ma > 0.0)) throw DomainError("misalignment shape parameter must be > 0");
  if (!(x >= 0.0 && x <= peak)) {
    throw DomainError("fading value " + std::to_string(x) + " outside [0, " + std::to_string(peak) + "]");
  }
}

inline double misalignment_pdf(double x, double peak, double gamma_ma) {
  check_fading_support(x, peak, gamma_ma);
  const double g2 = gamma_ma * gamma_ma;
  return g2 / std::pow(peak, g2) * std::pow(x, g2 - 1.0);
}

inline double misalignment_cdf(double x, double peak, double gamma_ma) {
  check_fading_support(x, peak, gamma_ma);
  return std::pow(x / peak, gamma_ma * gamma_ma);
}

/// Fraction of power collected at radial displacement eps: A exp(-2 eps^2 / w_eq^2).
inline double fading_coefficient(double eps, double peak, double w_eq) {
  return peak * std::exp(-2.0 * eps * eps / (w_eq * w_eq));
}

struct BlockageState {
  bool direct = true;  // direct path available
  bool ris = true;     // RIS path available
  bool operator==(const BlockageState&) const = default;
};

struct PointingError {
  double eps_d = 0;  // m
  double eps_r = 0;  // m
};

/// Draws two uniforms per call, direct path first.
inline BlockageState sample_blockage(const SystemConfig& cfg, Rng& rng) {
  BlockageState s;
  s.direct = !bernoulli(rng, cfg.q_d);
  s.ris = !bernoulli(rng, cfg.q_r);
  return s;
}

inline PointingError sample_pointing_error(const SystemConfig& cfg, Rng& rng) {
  PointingError e;
  e.eps_d = rayleigh(rng, cfg.sigma_md);
  e.eps_r = rayleigh(rng, cfg.sigma_mr);
  return e;
}

struct FadingState {
  double rho_d = 0;
  double rho_r = 0;
};

inline FadingState fading_from_pointing(const LinkBudget& b, const PointingError& e) {
  return {fading_coefficient(e.eps_d, b.A_d, b.w_eq_d), fading_coefficient(e.eps_r, b.A_ris_path(), b.w_eq_r)};
}

/// Squared channel magnitudes |h|^2 and |g|^2.
struct ChannelGains {
  double direct = 0;
  double ris = 0;
};

inline ChannelGains channel_gains(const LinkBudget& b, const BlockageState& beta, double rho_d, double rho_r) {
  ChannelGains g;
  g.direct = beta.direct ? b.eta_d * b.eta_d * rho_d : 0.0;
  g.ris = beta.ris ? b.eta_r * b.eta_r * rho_r : 0.0;
  return g;
}

}  // namespace thzris

#endif
