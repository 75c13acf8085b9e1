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

// Real-space reference for the pixel covariance: the double surface integral
//   C_sq(i,j) = G_inf/2 delta_ij + 1/(2 S) \int_{S_i} \int_{S_j} h(|rho' - rho''|),
// with the radial correlation h(rho) = 1/(2 pi) \int u H(u) J0(u rho) du
// computed by its own Hankel quadrature. Independent of the sinc^2 kernel, so
// agreement with the spectral path validates it. Slow; meant for tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "qholo/pixel_noise.hpp"
#include "qholo/quadrature.hpp"
#include "qholo/squeezing.hpp"

namespace qholo {

/// h(rho), rho in units of l_d, tabulated on [0, rho_max].
class RadialCorrelation {
 public:
  RadialCorrelation(const SqueezingSpectrum& s, double rho_max, int points = 300, double cutoff = 32.0)
      : drho_(rho_max / (points - 1)) {
    if (!(rho_max > 0.0) || points < 8) throw std::invalid_argument("RadialCorrelation: bad table size");
    const double umax = 2.0 * cutoff;
    const std::vector<double> edges =
        detail::graded_edges(umax, s.theta_rate(), 4.0 + 2.0 * s.r0() + rho_max, 6.0);
    const quad::ReferenceRule& ref = quad::reference_rule();
    std::vector<double> nodes;
    std::vector<double> weights;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double h = edges[p + 1] - edges[p];
      for (int j = 0; j < quad::kOrder; ++j) {
        const double u = edges[p] + 0.5 * h * (ref.x[j] + 1.0);
        nodes.push_back(u);
        weights.push_back(0.5 * h * ref.w[j] * u * s.h_u(u) * quad::planck_taper(u, cutoff, umax) /
                          (2.0 * std::numbers::pi));
      }
    }
    vals_.resize(static_cast<std::size_t>(points) + 3);
    for (std::size_t k = 0; k < vals_.size(); ++k) {
      const double rho = drho_ * static_cast<double>(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * boost::math::cyl_bessel_j(0, nodes[i] * rho);
      vals_[k] = acc;
    }
  }

  double operator()(double rho) const {
    const double x = rho / drho_;
    auto i = static_cast<std::size_t>(x);
    if (i + 3 >= vals_.size()) throw std::out_of_range("RadialCorrelation: rho beyond table");
    const std::size_t base = i == 0 ? 0 : i - 1;
    const double s = x - static_cast<double>(base);
    const double* v = &vals_[base];
    const double s1 = s - 1.0;
    const double s2 = s - 2.0;
    const double s3 = s - 3.0;
    return -v[0] * s1 * s2 * s3 / 6.0 + v[1] * s * s2 * s3 / 2.0 - v[2] * s * s1 * s3 / 2.0 + v[3] * s * s1 * s2 / 6.0;
  }

 private:
  double drho_;
  std::vector<double> vals_;
};

/// Brute-force C_sq between pixel (0,0) and pixel (mx,my) of side D (units of
/// l_d): 4-fold composite Gauss-Legendre over the two pixel surfaces.
inline double realspace_pixel_covariance(const SqueezingSpectrum& s, const RadialCorrelation& h, double D, int mx,
                                         int my, int panels = 4) {
  const quad::Rule r = quad::composite(0.0, D, static_cast<std::size_t>(panels));
  const std::size_t n = r.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < n; ++a) {      // x'
    for (std::size_t b = 0; b < n; ++b) {    // y'
      double inner = 0.0;
      for (std::size_t c = 0; c < n; ++c) {  // x''
        const double dx = r.x[a] - (r.x[c] + mx * D);
        double row = 0.0;
        for (std::size_t d = 0; d < n; ++d) {  // y''
          const double dy = r.x[b] - (r.x[d] + my * D);
          row += r.w[d] * h(std::sqrt(dx * dx + dy * dy));
        }
        inner += r.w[c] * row;
      }
      acc += r.w[a] * r.w[b] * inner;
    }
  }
  // Unit-normalized pixel modes: 1/S, not 1/S^2.
  const double area = D * D;
  return (mx == 0 && my == 0 ? 0.5 * s.asymptotic_green() : 0.0) + 0.5 * acc / area;
}

}  // namespace qholo
