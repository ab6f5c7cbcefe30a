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

#ifndef THZRIS_SEARCH_HPP
#define THZRIS_SEARCH_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace thzris {

struct ScalarOptimum {
  double x = 0;
  double value = 0;
  int iterations = 0;
  bool converged = false;
};

/// Golden-section maximisation of a unimodal function on [lo, hi]. Ties keep
/// the left sub-interval. The endpoints are evaluated as well and win if they
/// are at least as good (left endpoint first), so boundary optima come back
/// exactly.
template <class F>
ScalarOptimum golden_section_max(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
  constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
  ScalarOptimum best;
  if (!(hi > lo)) {
    best.x = lo;
    best.value = f(lo);
    best.converged = true;
    return best;
  }
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (b - a > x_tol && it < max_iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  best.iterations = it;
  best.converged = b - a <= x_tol;
  if (fc >= fd) {
    best.x = c;
    best.value = fc;
  } else {
    best.x = d;
    best.value = fd;
  }
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_hi >= best.value) {
    best.x = hi;
    best.value = f_hi;
  }
  if (f_lo >= best.value) {
    best.x = lo;
    best.value = f_lo;
  }
  return best;
}

/// True if the sequence rises (weakly) to a single peak and then falls
/// (weakly). A plateau counts as unimodal.
inline bool is_unimodal(const std::vector<double>& v) {
  std::size_t i = 1;
  while (i < v.size() && v[i] >= v[i - 1]) ++i;
  while (i < v.size() && v[i] <= v[i - 1]) ++i;
  return i >= v.size();
}

struct ArgmaxOptions {
  int prescan_points = 21;
  double x_tol = 1e-3;
  int fallback_points = 1001;
};

struct ArgmaxResult {
  double x = 0;
  double value = 0;
  bool used_fallback = false;
  std::vector<double> prescan_x;
  std::vector<double> prescan_value;
};

/// Argmax of an expensive scalar function on [lo, hi]. A coarse pre-scan
/// checks unimodality; if it holds, golden-section search refines inside the
/// bracket around the best scan point, otherwise a fine grid is used. Ties
/// resolve to the smallest x.
template <class F>
ArgmaxResult argmax_scalar(F&& f, double lo, double hi, const ArgmaxOptions& opt = {}) {
  ArgmaxResult r;
  const int n = opt.prescan_points < 2 ? 2 : opt.prescan_points;
  for (int i = 0; i < n; ++i) {
    double x = (i == n - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    r.prescan_x.push_back(x);
    r.prescan_value.push_back(f(x));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.prescan_value.size(); ++i) {
    if (r.prescan_value[i] > r.prescan_value[best]) best = i;
  }
  r.x = r.prescan_x[best];
  r.value = r.prescan_value[best];

  if (is_unimodal(r.prescan_value)) {
    const double a = r.prescan_x[best == 0 ? 0 : best - 1];
    const double b = r.prescan_x[best + 1 < r.prescan_x.size() ? best + 1 : best];
    auto g = golden_section_max(f, a, b, opt.x_tol);
    if (g.value > r.value || (g.value == r.value && g.x < r.x)) {
      r.x = g.x;
      r.value = g.value;
    }
    return r;
  }

  r.used_fallback = true;
  const int m = opt.fallback_points < 2 ? 2 : opt.fallback_points;
  for (int i = 0; i < m; ++i) {
    double x = (i == m - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (m - 1);
    double v = f(x);
    if (v > r.value || (v == r.value && x < r.x)) {
      r.x = x;
      r.value = v;
    }
  }
  return r;
}

}  // namespace thzris

#endif
