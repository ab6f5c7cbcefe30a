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

#ifndef THZRIS_CONFIG_HPP
#define THZRIS_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "io.hpp"

namespace thzris {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w * 1000.0); }

enum class ArrivalSplit { fluid, binomial };

/// Physical and traffic parameters of the downlink. Everything is SI and
/// linear; dB forms only appear in config files.
///
/// Defaults are the reference scenario: 300 GHz carrier, 10 GHz bandwidth,
/// 10 dBm transmit power, -174 dBm/Hz noise density, 40/35 dB antenna gains,
/// a 200x200 RIS, 5 Mbit packets in 100 ms slots at 800 packets/slot.
struct SystemConfig {
  double f = 300e9;                       // carrier frequency, Hz
  double B = 10e9;                        // bandwidth, Hz
  double P_max = dbm_to_watt(10.0);       // W
  double N0 = dbm_to_watt(-174.0);        // W/Hz
  double G_B = db_to_linear(40.0);
  double G_U = db_to_linear(35.0);
  double d_BU = 15.0;                     // m
  double d_BR = 15.8;                     // m
  double d_RU = 5.0;                      // m
  double k_a = 0.0012;                    // 1/m
  long N_R = 200 * 200;
  double q_d = 0.3;
  double q_r = 0.1;
  double sigma_md = 0.1;                  // Rayleigh scale, m
  double sigma_mr = 0.2;                  // Rayleigh scale, m
  double w_r = 0.8;                       // reflected-beam radius at the UE, m
  double alpha = 0.5;
  double A_bar = 800.0;                   // packets/slot
  double M = 5e6;                         // bit
  double T = 0.1;                         // s
  ArrivalSplit arrival_split = ArrivalSplit::fluid;

  bool operator==(const SystemConfig&) const = default;
};

/// Packets per slot carried by 1 bit/s of rate.
inline double packets_per_bit(const SystemConfig& cfg) { return cfg.T / cfg.M; }

/// Conversion from bit/s/Hz to packets/slot, T*B/M.
inline double traffic_scale(const SystemConfig& cfg) { return cfg.T * cfg.B / cfg.M; }

inline bool is_perfect_square(long n) {
  if (n < 0) return false;
  auto r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

/// Throws ConfigError on violated invariants. Returns non-fatal warnings.
inline std::vector<std::string> validate(const SystemConfig& cfg) {
  std::vector<std::string> bad;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be > 0");
  };
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) bad.push_back(std::string(name) + " must lie in [0, 1]");
  };
  positive(cfg.f, "f");
  positive(cfg.B, "B");
  positive(cfg.P_max, "P_max");
  positive(cfg.N0, "N0");
  positive(cfg.G_B, "G_B");
  positive(cfg.G_U, "G_U");
  positive(cfg.d_BU, "d_BU");
  positive(cfg.d_BR, "d_BR");
  positive(cfg.d_RU, "d_RU");
  positive(cfg.k_a, "k_a");
  positive(cfg.sigma_md, "sigma_md");
  positive(cfg.sigma_mr, "sigma_mr");
  positive(cfg.w_r, "w_r");
  positive(cfg.M, "M");
  positive(cfg.T, "T");
  unit(cfg.q_d, "q_d");
  unit(cfg.q_r, "q_r");
  unit(cfg.alpha, "alpha");
  if (!(cfg.A_bar >= 0.0) || !std::isfinite(cfg.A_bar)) bad.push_back("A_bar must be >= 0");
  if (cfg.N_R < 1 || !is_perfect_square(cfg.N_R)) bad.push_back("N_R must be a positive perfect square");
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
  std::vector<std::string> warnings;
  if (cfg.f < 100e9 || cfg.f > 450e9) {
    warnings.push_back("carrier frequency " + format_double(cfg.f) +
                       " Hz is outside 100-450 GHz, where the default absorption coefficient was fitted");
  }
  return warnings;
}

namespace detail {

struct KeySpec {
  const char* name;
  double SystemConfig::*field;
  enum Unit { linear, db, dbm } unit;
};

inline const std::vector<KeySpec>& numeric_keys() {
  static const std::vector<KeySpec> keys = {
      {"f", &SystemConfig::f, KeySpec::linear},
      {"B", &SystemConfig::B, KeySpec::linear},
      {"P_max", &SystemConfig::P_max, KeySpec::linear},
      {"P_max_dbm", &SystemConfig::P_max, KeySpec::dbm},
      {"N0", &SystemConfig::N0, KeySpec::linear},
      {"N0_dbm", &SystemConfig::N0, KeySpec::dbm},
      {"G_B", &SystemConfig::G_B, KeySpec::linear},
      {"G_B_db", &SystemConfig::G_B, KeySpec::db},
      {"G_U", &SystemConfig::G_U, KeySpec::linear},
      {"G_U_db", &SystemConfig::G_U, KeySpec::db},
      {"d_BU", &SystemConfig::d_BU, KeySpec::linear},
      {"d_BR", &SystemConfig::d_BR, KeySpec::linear},
      {"d_RU", &SystemConfig::d_RU, KeySpec::linear},
      {"k_a", &SystemConfig::k_a, KeySpec::linear},
      {"q_d", &SystemConfig::q_d, KeySpec::linear},
      {"q_r", &SystemConfig::q_r, KeySpec::linear},
      {"sigma_md", &SystemConfig::sigma_md, KeySpec::linear},
      {"sigma_mr", &SystemConfig::sigma_mr, KeySpec::linear},
      {"w_r", &SystemConfig::w_r, KeySpec::linear},
      {"alpha", &SystemConfig::alpha, KeySpec::linear},
      {"A_bar", &SystemConfig::A_bar, KeySpec::linear},
      {"M", &SystemConfig::M, KeySpec::linear},
      {"T", &SystemConfig::T, KeySpec::linear},
  };
  return keys;
}

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies `key = value` lines on top of `base`. `#` starts a comment.
/// Gains may be given in dB (`G_B_db`), powers in dBm (`P_max_dbm`, `N0_dbm`
/// in dBm/Hz). Unknown keys, duplicates, and a field given in two units are
/// all errors.
inline SystemConfig parse_config(std::istream& in, SystemConfig base = {}) {
  std::map<std::string, std::string> entries;
  std::vector<std::string> unknown;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!entries.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }

  std::map<std::string, std::string> seen;  // canonical field name -> key used
  for (const auto& [key, value] : entries) {
    if (key == "N_R") {
      double v = parse_double(value, key);
      if (v != std::floor(v)) throw ConfigError("N_R must be an integer");
      base.N_R = static_cast<long>(v);
      continue;
    }
    if (key == "arrival_split") {
      if (value == "fluid") base.arrival_split = ArrivalSplit::fluid;
      else if (value == "binomial") base.arrival_split = ArrivalSplit::binomial;
      else throw ConfigError("arrival_split must be 'fluid' or 'binomial'");
      continue;
    }
    const auto& keys = detail::numeric_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return key == k.name; });
    if (it == keys.end()) {
      unknown.push_back(key);
      continue;
    }
    auto canonical = std::find_if(keys.begin(), keys.end(), [&](const auto& k) {
      return k.field == it->field && k.unit == detail::KeySpec::linear;
    });
    if (auto [s, inserted] = seen.emplace(canonical->name, key); !inserted) {
      throw ConfigError("'" + key + "' and '" + s->second + "' set the same parameter");
    }
    double v = parse_double(value, key);
    switch (it->unit) {
      case detail::KeySpec::linear: base.*(it->field) = v; break;
      case detail::KeySpec::db: base.*(it->field) = db_to_linear(v); break;
      case detail::KeySpec::dbm: base.*(it->field) = dbm_to_watt(v); break;
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown configuration keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return base;
}

inline SystemConfig load_config(const std::string& path, SystemConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, base);
}

/// The shipped default configuration, gains and powers in dB as in the
/// reference parameter table.
inline std::string default_config_text() {
  return R"(# Reference scenario (RIS-assisted THz downlink)
f = 300e9            # carrier frequency, Hz
B = 10e9             # bandwidth, Hz
P_max_dbm = 10       # total transmit power, dBm
N0_dbm = -174        # noise power spectral density, dBm/Hz
G_B_db = 40          # BS antenna gain, dB
G_U_db = 35          # UE antenna gain, dB
d_BU = 15            # m
d_BR = 15.8          # m
d_RU = 5             # m
k_a = 0.0012         # molecular absorption coefficient, 1/m
N_R = 40000          # RIS elements (200 x 200)
q_d = 0.3            # blockage probability, direct path
q_r = 0.1            # blockage probability, RIS path
sigma_md = 0.1       # pointing-error Rayleigh scale, direct beam, m
sigma_mr = 0.2       # pointing-error Rayleigh scale, reflected beam, m
w_r = 0.8            # reflected-beam radius at the UE, m
alpha = 0.5          # HC fraction of arrivals
A_bar = 800          # mean arrivals, packets/slot
M = 5e6              # packet size, bit
T = 0.1              # slot duration, s
arrival_split = fluid
)";
}

/// Linear, full-precision form used in manifests; parses back bit-exactly.
inline std::string to_config_text(const SystemConfig& cfg) {
  std::ostringstream out;
  for (const auto& k : detail::numeric_keys()) {
    if (k.unit != detail::KeySpec::linear) continue;
    out << k.name << " = " << format_double(cfg.*(k.field)) << '\n';
  }
  out << "N_R = " << cfg.N_R << '\n';
  out << "arrival_split = " << (cfg.arrival_split == ArrivalSplit::fluid ? "fluid" : "binomial") << '\n';
  return out.str();
}

}  // namespace thzris

#endif
