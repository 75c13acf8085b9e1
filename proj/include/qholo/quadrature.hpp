// Copyright 2026 The qholo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Composite Gauss-Legendre rules, Lagrange bases on the reference nodes, and
// the smooth cutoff used for Abel summation of oscillatory tails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace qholo::quad {

inline constexpr int kOrder = 16;

/// Reference Gauss-Legendre rule on [-1, 1], nodes ascending.
struct ReferenceRule {
  std::array<double, kOrder> x{};
  std::array<double, kOrder> w{};
  /// Barycentric weights for Lagrange interpolation through x.
  std::array<double, kOrder> bary{};
};

inline const ReferenceRule& reference_rule() {
  static const ReferenceRule rule = [] {
    using G = boost::math::quadrature::gauss<double, kOrder>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    ReferenceRule r;
    constexpr int half = kOrder / 2;
    for (int i = 0; i < half; ++i) {
      r.x[half - 1 - i] = -a[i];
      r.w[half - 1 - i] = wt[i];
      r.x[half + i] = a[i];
      r.w[half + i] = wt[i];
    }
    for (int j = 0; j < kOrder; ++j) {
      double p = 1.0;
      for (int k = 0; k < kOrder; ++k) {
        if (k != j) p *= r.x[j] - r.x[k];
      }
      r.bary[j] = 1.0 / p;
    }
    return r;
  }();
  return rule;
}

/// Values of the Lagrange basis polynomials through the reference nodes at s.
inline void lagrange_basis(double s, std::array<double, kOrder>& out) {
  const ReferenceRule& r = reference_rule();
  double denom = 0.0;
  for (int j = 0; j < kOrder; ++j) {
    const double d = s - r.x[j];
    if (d == 0.0) {
      out.fill(0.0);
      out[j] = 1.0;
      return;
    }
    out[j] = r.bary[j] / d;
    denom += out[j];
  }
  for (double& v : out) v /= denom;
}

/// Nodes and weights of a composite rule.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

/// Composite rule on [a, b] with `panels` equal panels.
inline Rule composite(double a, double b, std::size_t panels) {
  if (panels == 0) throw std::invalid_argument("composite rule: panels must be >= 1");
  const ReferenceRule& r = reference_rule();
  Rule out;
  out.x.reserve(panels * kOrder);
  out.w.reserve(panels * kOrder);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    for (int j = 0; j < kOrder; ++j) {
      out.x.push_back(lo + 0.5 * h * (r.x[j] + 1.0));
      out.w.push_back(0.5 * h * r.w[j]);
    }
  }
  return out;
}

/// Number of equal panels on an interval of given length so that an
/// oscillation of angular rate `rate` advances at most `per_panel` radians per
/// panel. The default keeps the 16-point rule near machine precision.
inline std::size_t panels_for(double length, double rate, double per_panel = 6.0) {
  const double n = std::ceil(length * std::max(rate, 1e-12) / per_panel);
  return static_cast<std::size_t>(std::max(1.0, n));
}

/// C-infinity step: 1 for x <= a, 0 for x >= b (Planck taper).
inline double planck_taper(double x, double a, double b) {
  if (x <= a) return 1.0;
  if (x >= b) return 0.0;
  const double span = b - a;
  const double z = span / (b - x) - span / (x - a);
  if (z > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace qholo::quad
