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

// Spatial squeezing spectra at zero temporal frequency.
//
// All spectra are evaluated in the dimensionless radial frequency u = |q| l_d
// and are radial, so evenness in q holds by construction. The X-quadrature
// Green function is G_X = e^{2r} cos^2(psi) + e^{-2r} sin^2(psi), i.e. psi is
// the angle of the anti-squeezed axis measured from X.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Boost 1.74 pchip calls unqualified isnan; math.h puts it in the global namespace.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

namespace qholo {

/// Bogoliubov coefficients of the traveling-wave degenerate amplifier at
/// phase mismatch theta = u^2 and gain g.
struct Bogoliubov {
  std::complex<double> u;
  std::complex<double> v;
  /// Unit phase of v; well defined even where v vanishes.
  std::complex<double> v_dir;
};

inline Bogoliubov opa_bogoliubov(double u, double g) {
  const double theta = u * u;
  const double gamma2 = g * g - 0.25 * theta * theta;
  double ch = 0.0;
  double shc = 0.0;  // sinh(G)/G, continued to sin(g)/g
  const double s = std::sqrt(std::abs(gamma2));
  if (s < 1e-4) {
    // Series in gamma2 keeps the two branches continuous at theta = 2g.
    ch = 1.0 + gamma2 / 2.0 + gamma2 * gamma2 / 24.0;
    shc = 1.0 + gamma2 / 6.0 + gamma2 * gamma2 / 120.0;
  } else if (gamma2 > 0.0) {
    ch = std::cosh(s);
    shc = std::sinh(s) / s;
  } else {
    ch = std::cos(s);
    shc = std::sin(s) / s;
  }
  const std::complex<double> phase = std::polar(1.0, 0.5 * theta);
  Bogoliubov b;
  b.u = phase * std::complex<double>(ch, -0.5 * theta * shc);
  b.v = phase * (g * shc);
  b.v_dir = (g * shc < 0.0) ? -phase : phase;
  return b;
}

/// Curvature d psi / d(u^2) at u = 0 of the amplifier orientation, exact.
inline double opa_lens_curvature_exact(double g) {
  if (g < 1e-6) return 0.25 + g * g / 12.0;
  return 0.5 - std::tanh(g) / (4.0 * g);
}

inline double green_x(double r, double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return std::exp(2.0 * r) * c * c + std::exp(-2.0 * r) * s * s;
}

class SqueezingSpectrum {
 public:
  enum class Model { opa, flat, custom };

  Model model() const { return model_; }
  double coherence_length() const { return l_d_; }
  /// r(u = 0). For custom tables the first tabulated value.
  double r0() const { return r0_; }
  /// Quadratic orientation correction: psi(u) -> psi(u) - curvature * u^2.
  double lens_curvature() const { return lens_c_; }
  /// Constant added to the orientation, so that psi(0) = pi/2 + offset.
  double psi_offset() const { return psi_offset_; }

  double r_u(double u) const {
    u = std::abs(u);
    switch (model_) {
      case Model::opa:
        return std::asinh(std::abs(opa_bogoliubov(u, r0_).v));
      case Model::flat:
        return r0_;
      case Model::custom:
        return table_r(u);
    }
    return 0.0;
  }

  /// Orientation psi(u), reduced to (-pi/2, pi/2] + pi/2 only up to multiples
  /// of pi (G_X is pi-periodic in psi).
  double psi_u(double u) const {
    u = std::abs(u);
    return raw_psi(u) + psi_offset_ - lens_c_ * u * u;
  }

  double r(double q) const { return r_u(q * l_d_); }
  double psi(double q) const { return psi_u(q * l_d_); }

  /// G_X(u) - G_inf. Computed without forming G_X for the amplifier model, so
  /// the large-u tail keeps full relative precision.
  double h_u(double u) const {
    u = std::abs(u);
    if (model_ == Model::opa) {
      const Bogoliubov b = opa_bogoliubov(u, r0_);
      const double delta = lens_c_ * u * u - psi_offset_;
      // cos(2 psi) e^{2r}... expanded with |U|^2 - |V|^2 = 1.
      const std::complex<double> uv = b.u * std::abs(b.v) * b.v_dir * std::polar(1.0, -2.0 * delta);
      return 2.0 * std::norm(b.v) - 2.0 * uv.real();
    }
    return green_x(r_u(u), psi_u(u)) - g_inf_;
  }

  double green_u(double u) const { return h_u(u) + g_inf_; }
  double green(double q) const { return green_u(q * l_d_); }

  /// Limit of G_X at large u (Abel mean if it keeps oscillating).
  double asymptotic_green() const { return g_inf_; }

  /// Upper bound on |G_X(u) - G_inf| for all u >= u0.
  double h_envelope(double u0) const {
    u0 = std::abs(u0);
    if (model_ == Model::opa) {
      const double theta = u0 * u0;
      const double g = r0_;
      double vmax = std::sinh(g);
      if (theta > 2.0 * g) {
        const double gam = std::sqrt(0.25 * theta * theta - g * g);
        if (gam > 1e-12) vmax = std::min(vmax, g / gam);
      }
      return 2.0 * vmax * vmax + 2.0 * vmax * std::sqrt(1.0 + vmax * vmax);
    }
    if (model_ == Model::flat) return 0.0;
    double rmax = r_tail_;
    for (std::size_t i = 0; i < r_x_.size(); ++i) {
      if (r_x_[i] >= u0 || (i + 1 < r_x_.size() && r_x_[i + 1] >= u0)) rmax = std::max(rmax, std::abs(r_y_[i]));
    }
    return std::exp(2.0 * rmax) + g_inf_;
  }

  /// Upper bound on the angular rate, in theta = u^2, of the oscillation of
  /// h_u at large u. Drives quadrature resolution.
  double theta_rate() const {
    switch (model_) {
      case Model::opa:
        // Tail terms of H oscillate as e^{i theta}, e^{i(1-2c) theta} and e^{-2ic theta}.
        return 1.1 * std::max({1.0, std::abs(1.0 - 2.0 * lens_c_), 2.0 * std::abs(lens_c_)});
      case Model::flat:
        return 0.0;
      case Model::custom:
        return custom_rate_ + 2.0 * std::abs(lens_c_);
    }
    return 0.0;
  }

  /// d psi / d(u^2) at u = 0 by central differences in u with Richardson
  /// extrapolation. Evenness makes psi(h) - 2 psi(0) + psi(-h) = 2 (psi(h) - psi(0)).
  double psi_curvature_fd(double h = 0.05) const {
    auto d2 = [&](double step) {
      double diff = psi_u(step) - psi_u(0.0);
      diff -= std::numbers::pi * std::round(diff / std::numbers::pi);
      return diff / (step * step);
    };
    // Error expansion in even powers of the step: three-level Richardson.
    const double a0 = d2(h);
    const double a1 = d2(h / 2.0);
    const double a2 = d2(h / 4.0);
    const double b0 = (4.0 * a1 - a0) / 3.0;
    const double b1 = (4.0 * a2 - a1) / 3.0;
    return (16.0 * b1 - b0) / 15.0;
  }

  SqueezingSpectrum with_lens(double curvature) const {
    SqueezingSpectrum out = *this;
    out.lens_c_ = lens_c_ + curvature;
    out.refresh_asymptote();
    return out;
  }

  SqueezingSpectrum with_psi_offset(double offset) const {
    SqueezingSpectrum out = *this;
    out.psi_offset_ = offset;
    out.refresh_asymptote();
    return out;
  }

  static SqueezingSpectrum opa(double r0, double l_d) {
    if (!(r0 >= 0.0)) throw std::invalid_argument("opa_spectrum: r0 must be >= 0");
    check_ld(l_d);
    SqueezingSpectrum s;
    s.model_ = Model::opa;
    s.r0_ = r0;
    s.l_d_ = l_d;
    s.g_inf_ = 1.0;
    return s;
  }

  static SqueezingSpectrum flat(double r, double psi, double l_d) {
    if (!(r >= 0.0)) throw std::invalid_argument("flat_spectrum: r must be >= 0");
    check_ld(l_d);
    SqueezingSpectrum s;
    s.model_ = Model::flat;
    s.r0_ = r;
    s.l_d_ = l_d;
    s.psi_offset_ = psi - std::numbers::pi / 2.0;
    s.refresh_asymptote();
    return s;
  }

  /// Tables are (u, r) and (u, psi) with u = q l_d strictly increasing and
  /// starting at 0. Beyond the last node r and psi are held constant.
  static SqueezingSpectrum custom(std::vector<double> r_u, std::vector<double> r_vals, std::vector<double> psi_u,
                                  std::vector<double> psi_vals, double l_d) {
    check_ld(l_d);
    check_table(r_u, r_vals, "r");
    check_table(psi_u, psi_vals, "psi");
    for (double v : r_vals) {
      if (v < 0.0) throw std::invalid_argument("custom spectrum: r must be >= 0");
    }
    SqueezingSpectrum s;
    s.model_ = Model::custom;
    s.l_d_ = l_d;
    s.r0_ = r_vals.front();
    s.r_tail_ = r_vals.back();
    s.psi_tail_ = psi_vals.back();
    s.r_x_ = r_u;
    s.r_y_ = r_vals;
    double rate = 0.0;
    for (std::size_t i = 1; i < psi_u.size(); ++i) {
      const double dt = psi_u[i] * psi_u[i] - psi_u[i - 1] * psi_u[i - 1];
      rate = std::max(rate, 2.0 * std::abs(psi_vals[i] - psi_vals[i - 1]) / dt);
    }
    s.custom_rate_ = rate;
    s.psi_end_ = psi_u.back();
    s.r_end_ = r_u.back();
    s.r_interp_ = make_pchip(std::move(r_u), std::move(r_vals));
    s.psi_interp_ = make_pchip(std::move(psi_u), std::move(psi_vals));
    s.psi_offset_ = 0.0;
    s.refresh_asymptote();
    return s;
  }

 private:
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

  static void check_ld(double l_d) {
    if (!(l_d > 0.0)) throw std::invalid_argument("squeezing spectrum: l_d must be > 0");
  }

  static void check_table(const std::vector<double>& x, const std::vector<double>& y, const char* what) {
    if (x.size() != y.size() || x.size() < 4) {
      throw std::invalid_argument(std::string("custom spectrum: ") + what + " table needs >= 4 rows");
    }
    if (x.front() != 0.0) throw std::invalid_argument(std::string("custom spectrum: ") + what + " table must start at 0");
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) {
        throw std::invalid_argument(std::string("custom spectrum: ") + what + " abscissae must increase");
      }
    }
  }

  static std::shared_ptr<const Pchip> make_pchip(std::vector<double> x, std::vector<double> y) {
    return std::make_shared<const Pchip>(std::move(x), std::move(y));
  }

  double table_r(double u) const { return u >= r_end_ ? r_tail_ : std::max(0.0, (*r_interp_)(u)); }

  double raw_psi(double u) const {
    switch (model_) {
      case Model::opa: {
        const Bogoliubov b = opa_bogoliubov(u, r0_);
        return 0.5 * std::arg(b.u * b.v_dir) + std::numbers::pi / 2.0;
      }
      case Model::flat:
        return std::numbers::pi / 2.0;
      case Model::custom:
        return u >= psi_end_ ? psi_tail_ : (*psi_interp_)(u);
    }
    return 0.0;
  }

  void refresh_asymptote() {
    switch (model_) {
      case Model::opa:
        g_inf_ = 1.0;
        break;
      case Model::flat:
        // psi_u has no u dependence unless a lens was applied; a rotating
        // ellipse averages to cosh(2r).
        g_inf_ = lens_c_ != 0.0 ? std::cosh(2.0 * r0_) : green_x(r0_, std::numbers::pi / 2.0 + psi_offset_);
        break;
      case Model::custom:
        g_inf_ = (lens_c_ != 0.0 && r_tail_ > 0.0) ? std::cosh(2.0 * r_tail_)
                                                   : green_x(r_tail_, psi_tail_ + psi_offset_);
        break;
    }
  }

  Model model_ = Model::opa;
  double r0_ = 0.0;
  double l_d_ = 1.0;
  double lens_c_ = 0.0;
  double psi_offset_ = 0.0;
  double g_inf_ = 1.0;
  // custom tables
  double r_tail_ = 0.0;
  double psi_tail_ = 0.0;
  double r_end_ = 0.0;
  double psi_end_ = 0.0;
  double custom_rate_ = 0.0;
  std::vector<double> r_x_;
  std::vector<double> r_y_;
  std::shared_ptr<const Pchip> r_interp_;
  std::shared_ptr<const Pchip> psi_interp_;
};

inline SqueezingSpectrum opa_spectrum(double r0, double l_d) { return SqueezingSpectrum::opa(r0, l_d); }

inline SqueezingSpectrum flat_spectrum(double r, double psi, double l_d) {
  return SqueezingSpectrum::flat(r, psi, l_d);
}

/// psi(0) set to `psi0` (the amplifier model gives pi/2).
inline SqueezingSpectrum with_psi0(const SqueezingSpectrum& s, double psi0) {
  return s.with_psi_offset(psi0 - std::numbers::pi / 2.0);
}

/// Thin-lens orientation correction: subtracts the low-frequency curvature of
/// psi, found by finite differences, so the corrected psi is stationary at 0.
inline SqueezingSpectrum lens_correct(const SqueezingSpectrum& s) {
  const double c = s.psi_curvature_fd();
  if (std::abs(c) < 1e-14) return s;
  return s.with_lens(c);
}

inline double green_x(const SqueezingSpectrum& s, double q) { return s.green(q); }

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> read_two_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spectrum table: " + path);
  std::vector<double> x;
  std::vector<double> y;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double a = 0.0;
    double b = 0.0;
    if (!(row >> a)) continue;
    if (!(row >> b)) throw std::runtime_error("spectrum table " + path + ": row with one column");
    x.push_back(a);
    y.push_back(b);
  }
  return {std::move(x), std::move(y)};
}

}  // namespace detail

/// Loads (q l_d, r) and (q l_d, psi) tables: whitespace or comma separated,
/// '#' starts a comment.
inline SqueezingSpectrum load_custom_spectrum(const std::string& r_path, const std::string& psi_path, double l_d) {
  auto [ru, rv] = detail::read_two_columns(r_path);
  auto [pu, pv] = detail::read_two_columns(psi_path);
  return SqueezingSpectrum::custom(std::move(ru), std::move(rv), std::move(pu), std::move(pv), l_d);
}

}  // namespace qholo
