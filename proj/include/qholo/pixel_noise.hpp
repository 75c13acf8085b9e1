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

// Pixel-averaged noise covariances.
//
// The squeezed-light part is
//   C_sq(i,j) = 1/2 \int d^2q B(q) cos(q.(rho_i - rho_j)) G_X(q),
//   B(q) = (Delta/2pi)^2 sinc^2(q_x Delta/2) sinc^2(q_y Delta/2).
// Writing G_X = G_inf + H, the constant gives G_inf/2 on the diagonal exactly
// (B integrates to 1 and is orthogonal to the lattice cosines). Only H is
// integrated numerically. H of the amplifier model carries a slowly decaying
// chirp, so the integral is Abel-summed: H is multiplied by a smooth radial
// cutoff whose radius is doubled until the result stops changing.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qholo/protocol.hpp"
#include "qholo/quadrature.hpp"
#include "qholo/squeezing.hpp"

namespace qholo {

struct PixelGrid {
  int n_side = 1;
  double delta = 1.0;
  bool periodic = false;

  static PixelGrid square(int n_side, double delta, bool periodic = false) {
    if (n_side < 1) throw std::invalid_argument("PixelGrid: n_side must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("PixelGrid: delta must be > 0");
    return {n_side, delta, periodic};
  }

  int size() const { return n_side * n_side; }
  int ix(int i) const { return i % n_side; }
  int iy(int i) const { return i / n_side; }
  int index(int x, int y) const { return y * n_side + x; }

  std::vector<std::array<double, 2>> centers() const {
    std::vector<std::array<double, 2>> c;
    c.reserve(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) c.push_back({(ix(i) + 0.5) * delta, (iy(i) + 0.5) * delta});
    return c;
  }

  /// Lattice offset between pixels, reduced to [0, n) per axis on a torus.
  std::array<int, 2> offset(int i, int j) const {
    int dx = ix(i) - ix(j);
    int dy = iy(i) - iy(j);
    if (periodic) {
      dx = ((dx % n_side) + n_side) % n_side;
      dy = ((dy % n_side) + n_side) % n_side;
    } else {
      dx = std::abs(dx);
      dy = std::abs(dy);
    }
    return {dx, dy};
  }
};

namespace detail {

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace detail

inline double pixel_kernel(double qx, double qy, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("pixel_kernel: delta must be > 0");
  const double a = detail::sinc(0.5 * qx * delta);
  const double b = detail::sinc(0.5 * qy * delta);
  const double c = delta / (2.0 * std::numbers::pi);
  return c * c * a * a * b * b;
}

/// exp(2 r0) / (n_a l lambda), unit coefficient.
inline double density_noise_diag(double r0, double n_a, double l, double lambda) {
  if (!(n_a > 0.0) || !(l > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("density_noise_diag: n_a, l and lambda must be > 0");
  }
  return std::exp(2.0 * r0) / (n_a * l * lambda);
}

struct QuadratureOptions {
  double rel_tol = 1e-6;
  /// Largest Abel cutoff radius in u = q l_d.
  double max_cutoff = 512.0;
};

struct CovarianceEstimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// C_sq at lattice offsets (m_x, m_y), m in [0, M] (open plane) or [0, n)
/// (torus). `values(mx, my)`.
struct OffsetTable {
  Eigen::MatrixXd values;
  double error = 0.0;
  bool converged = false;
  double cutoff = 0.0;
  bool periodic = false;

  double at(int mx, int my) const { return values(mx, my); }
};

namespace detail {

// H(sqrt(t)) * taper(sqrt(t)) on a uniform t grid, cubic Lagrange interpolation.
class TaperedTable {
 public:
  TaperedTable(const SqueezingSpectrum& s, double taper_lo, double taper_hi) : t_end_(taper_hi * taper_hi) {
    const double rate = std::max({s.theta_rate(), 2.0 + 2.0 * s.r0(), 1.0});
    dt_ = 0.01 / rate;
    const auto n = static_cast<std::size_t>(std::ceil(t_end_ / dt_)) + 4;
    vals_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = dt_ * static_cast<double>(i);
      const double u = std::sqrt(t);
      vals_[i] = t >= t_end_ ? 0.0 : s.h_u(u) * quad::planck_taper(u, taper_lo, taper_hi);
    }
    // Self-check at interval midpoints.
    const std::size_t stride = std::max<std::size_t>(1, n / 4000);
    for (std::size_t i = 0; i + 3 < n; i += stride) {
      const double t = dt_ * (static_cast<double>(i) + 0.5);
      if (t >= t_end_) break;
      const double u = std::sqrt(t);
      const double exact = s.h_u(u) * quad::planck_taper(u, taper_lo, taper_hi);
      max_err_ = std::max(max_err_, std::abs(exact - (*this)(t)));
    }
  }

  double operator()(double t) const {
    if (t >= t_end_) return 0.0;
    const double x = t / dt_;
    auto i = static_cast<std::size_t>(x);
    std::size_t base = i == 0 ? 0 : i - 1;
    const double s = x - static_cast<double>(base);  // in [0, 3)
    const double* v = &vals_[base];
    const double s0 = s;
    const double s1 = s - 1.0;
    const double s2 = s - 2.0;
    const double s3 = s - 3.0;
    return -v[0] * s1 * s2 * s3 / 6.0 + v[1] * s0 * s2 * s3 / 2.0 - v[2] * s0 * s1 * s3 / 2.0 +
           v[3] * s0 * s1 * s2 / 6.0;
  }

  double max_error() const { return max_err_; }

 private:
  double t_end_;
  double dt_ = 0.0;
  std::vector<double> vals_;
  double max_err_ = 0.0;
};

// cos(m a) for m = 0..M by the Chebyshev recurrence.
inline void cos_multiples(double a, int M, double* out) {
  const double c = std::cos(a);
  out[0] = 1.0;
  if (M >= 1) out[1] = c;
  for (int m = 2; m <= M; ++m) out[m] = 2.0 * c * out[m - 1] - out[m - 2];
}

// Panel edges on [0, umax] with the phase  omega x^2 + base x  advancing by at
// most `per` per panel: panels widen where the chirp of H is slow.
inline std::vector<double> graded_edges(double umax, double omega, double base, double per) {
  auto phase = [&](double x) { return omega * x * x + base * x; };
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(phase(umax) / per)));
  std::vector<double> e(n + 1);
  const double total = phase(umax);
  for (std::size_t p = 0; p <= n; ++p) {
    const double ph = total * static_cast<double>(p) / static_cast<double>(n);
    e[p] = omega > 0.0 ? (-base + std::sqrt(base * base + 4.0 * omega * ph)) / (2.0 * omega) : ph / base;
  }
  e.back() = umax;
  return e;
}

// Integral over the positive quadrant of s(x) s(y) cos(mx D x) cos(my D y)
// H w_c(|u|), w_c the cutoff from uc to 2 uc, by product integration: the
// separable pixel factors go into moments against the Lagrange basis of
// coarse panels, and H is only sampled on the coarse tensor grid, whose
// resolution follows the local chirp rate of H rather than D.
inline Eigen::MatrixXd core_quadrant(const SqueezingSpectrum& s, double D, int M, double uc, double& table_err) {
  const double umax = 2.0 * uc;
  const std::vector<double> edges = graded_edges(umax, s.theta_rate(), 4.0 + 2.0 * s.r0(), 7.0);
  const std::size_t panels = edges.size() - 1;
  const int K = quad::kOrder;
  const quad::ReferenceRule& ref = quad::reference_rule();
  const auto nc = static_cast<Eigen::Index>(panels * K);

  std::vector<double> xc(static_cast<std::size_t>(nc));
  for (std::size_t p = 0; p < panels; ++p) {
    const double h = edges[p + 1] - edges[p];
    for (int j = 0; j < K; ++j) xc[p * K + j] = edges[p] + 0.5 * h * (ref.x[j] + 1.0);
  }

  // Moments mu(m, node) = \int_panel s(x) cos(m D x) l_j(x) dx.
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(M + 1, nc);
  std::array<double, quad::kOrder> basis{};
  std::vector<double> cm(static_cast<std::size_t>(M + 1));
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = edges[p];
    const double h = edges[p + 1] - lo;
    const std::size_t sub = quad::panels_for(h, D * (M + 1) + 1.0);
    const double hs = h / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      for (int f = 0; f < K; ++f) {
        const double x = lo + hs * (static_cast<double>(q) + 0.5 * (ref.x[f] + 1.0));
        const double w = 0.5 * hs * ref.w[f];
        const double sx = sinc(0.5 * x * D);
        cos_multiples(x * D, M, cm.data());
        quad::lagrange_basis(2.0 * (x - lo) / h - 1.0, basis);
        for (int m = 0; m <= M; ++m) {
          const double a = w * sx * sx * cm[static_cast<std::size_t>(m)];
          for (int j = 0; j < K; ++j) mu(m, static_cast<Eigen::Index>(p * K + j)) += a * basis[j];
        }
      }
    }
  }

  // K(a, b) = H w_c at (x_a, x_b) is symmetric: accumulate the strict lower
  // triangle plus half the diagonal, then symmetrize.
  const TaperedTable table(s, uc, umax);
  table_err = table.max_error();
  const double t_end = umax * umax;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(nc, M + 1);
  Eigen::VectorXd row(nc);
  for (Eigen::Index a = 0; a < nc; ++a) {
    const double xa2 = xc[a] * xc[a];
    Eigen::Index nb = 0;
    while (nb <= a && xa2 + xc[nb] * xc[nb] < t_end) {
      row[nb] = table(xa2 + xc[nb] * xc[nb]);
      ++nb;
    }
    if (nb == 0) break;
    if (nb == a + 1) row[a] *= 0.5;
    z.row(a).noalias() = (mu.leftCols(nb) * row.head(nb)).transpose();
  }
  const Eigen::MatrixXd half = mu * z;
  return half + half.transpose();
}

// Same integrand restricted to the annulus where w_c < 1, cut off smoothly
// from uf to 2 uf, in polar coordinates: the angular integral A_m(u) is smooth
// in u and is interpolated on coarse radial panels, while the radial chirp of
// H is resolved on fine sub-panels.
inline Eigen::MatrixXd far_quadrant(const SqueezingSpectrum& s, double D, int M, double uc, double uf) {
  const double lo = uc;
  const double hi = 2.0 * uf;
  const double k_a = std::numbers::sqrt2 * D * (M + 1) + 4.0 / uc;
  const std::size_t panels = quad::panels_for(hi - lo, k_a);
  const double h = (hi - lo) / static_cast<double>(panels);
  const int K = quad::kOrder;
  const quad::ReferenceRule& ref = quad::reference_rule();
  const int nm = (M + 1) * (M + 1);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(M + 1, M + 1);
  std::array<double, quad::kOrder> basis{};
  std::array<double, quad::kOrder> nu{};
  std::vector<double> cx(static_cast<std::size_t>(M + 1));
  std::vector<double> cy(static_cast<std::size_t>(M + 1));
  std::vector<double> amp(static_cast<std::size_t>(nm));

  for (std::size_t p = 0; p < panels; ++p) {
    const double a = lo + h * static_cast<double>(p);
    // Radial weights nu_j = \int u H (1 - w_c) w_f l_j du.
    nu.fill(0.0);
    const double rate = 2.0 * s.theta_rate() * (a + h) + 2.0 * s.r0() + 8.0 / uc;
    const std::size_t sub = quad::panels_for(h, rate);
    const double hs = h / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      for (int f = 0; f < K; ++f) {
        const double u = a + hs * (static_cast<double>(q) + 0.5 * (ref.x[f] + 1.0));
        const double w = 0.5 * hs * ref.w[f];
        const double taper = (1.0 - quad::planck_taper(u, uc, 2.0 * uc)) * quad::planck_taper(u, uf, 2.0 * uf);
        if (taper == 0.0) continue;
        const double val = w * u * s.h_u(u) * taper;
        quad::lagrange_basis(2.0 * (u - a) / h - 1.0, basis);
        for (int j = 0; j < K; ++j) nu[j] += val * basis[j];
      }
    }
    // Angular integrals at the coarse nodes.
    for (int j = 0; j < K; ++j) {
      if (nu[j] == 0.0) continue;
      const double u = a + 0.5 * h * (ref.x[j] + 1.0);
      std::fill(amp.begin(), amp.end(), 0.0);
      const std::size_t ang = quad::panels_for(0.5 * std::numbers::pi, u * D * std::numbers::sqrt2 * (M + 1) + 2.0);
      const double ha = 0.5 * std::numbers::pi / static_cast<double>(ang);
      for (std::size_t g = 0; g < ang; ++g) {
        for (int f = 0; f < K; ++f) {
          const double phi = ha * (static_cast<double>(g) + 0.5 * (ref.x[f] + 1.0));
          const double w = 0.5 * ha * ref.w[f];
          const double x = u * std::cos(phi);
          const double y = u * std::sin(phi);
          const double sx = sinc(0.5 * x * D);
          const double sy = sinc(0.5 * y * D);
          const double base = w * sx * sx * sy * sy;
          cos_multiples(x * D, M, cx.data());
          cos_multiples(y * D, M, cy.data());
          for (int mx = 0; mx <= M; ++mx) {
            const double bx = base * cx[static_cast<std::size_t>(mx)];
            for (int my = 0; my <= M; ++my) amp[static_cast<std::size_t>(mx * (M + 1) + my)] += bx * cy[static_cast<std::size_t>(my)];
          }
        }
      }
      for (int mx = 0; mx <= M; ++mx) {
        for (int my = 0; my <= M; ++my) out(mx, my) += nu[j] * amp[static_cast<std::size_t>(mx * (M + 1) + my)];
      }
    }
  }
  return out;
}

// Entries are judged against the vacuum level 1/2, their natural scale.
inline double table_tolerance(const Eigen::MatrixXd& v, double rel_tol) {
  return rel_tol * std::max(std::abs(v(0, 0)), kVacuumVariance);
}

}  // namespace detail

/// Infinite-plane C_sq at all offsets (m_x, m_y) in [0, max_offset]^2 for
/// pixels of side delta.
inline OffsetTable plane_offset_table(const SqueezingSpectrum& s, double delta, int max_offset,
                                      const QuadratureOptions& opt = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("plane_offset_table: delta must be > 0");
  if (max_offset < 0) throw std::invalid_argument("plane_offset_table: max_offset must be >= 0");
  const int M = max_offset;
  const double D = delta / s.coherence_length();
  const double pref = 0.5 * std::pow(D / (2.0 * std::numbers::pi), 2) * 4.0;

  OffsetTable out;
  out.values = Eigen::MatrixXd::Zero(M + 1, M + 1);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Zero(M + 1, M + 1);
  constant(0, 0) = 0.5 * s.asymptotic_green();

  if (s.model() == SqueezingSpectrum::Model::flat && s.lens_curvature() == 0.0) {
    out.values = constant;
    out.converged = true;
    return out;
  }

  double table_err = 0.0;
  double uc = 8.0;
  // Polar tail only where its angular resolution stays cheap.
  const bool polar_tail = D * (M + 1) <= 4.0;
  Eigen::MatrixXd prev;
  Eigen::MatrixXd cur;
  double change = 0.0;
  if (polar_tail) {
    const Eigen::MatrixXd core = pref * detail::core_quadrant(s, D, M, uc, table_err);
    double uf = 2.0 * uc;
    prev = constant + core + pref * detail::far_quadrant(s, D, M, uc, uf);
    out.cutoff = uf;
    while (true) {
      uf *= 2.0;
      if (uf > opt.max_cutoff) break;
      cur = constant + core + pref * detail::far_quadrant(s, D, M, uc, uf);
      change = (cur - prev).cwiseAbs().maxCoeff();
      prev = cur;
      out.cutoff = uf;
      if (change <= detail::table_tolerance(cur, opt.rel_tol)) {
        out.converged = true;
        break;
      }
    }
  } else {
    prev = constant + pref * detail::core_quadrant(s, D, M, uc, table_err);
    out.cutoff = uc;
    while (true) {
      uc *= 2.0;
      if (uc > std::min(opt.max_cutoff, 32.0)) break;
      double err = 0.0;
      cur = constant + pref * detail::core_quadrant(s, D, M, uc, err);
      table_err = std::max(table_err, err);
      change = (cur - prev).cwiseAbs().maxCoeff();
      prev = cur;
      out.cutoff = uc;
      if (change <= detail::table_tolerance(cur, opt.rel_tol)) {
        out.converged = true;
        break;
      }
    }
  }
  out.values = prev;
  out.error = change + 0.5 * table_err;
  return out;
}

/// Covariance of an n x n torus of pixels: the exact sum over periodic images,
/// evaluated as a lattice sum over the quantized wave vectors 2 pi k/(n Delta).
inline OffsetTable torus_offset_table(const SqueezingSpectrum& s, double delta, int n,
                                      const QuadratureOptions& opt = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("torus_offset_table: delta must be > 0");
  if (n < 1) throw std::invalid_argument("torus_offset_table: n must be >= 1");
  const double D = delta / s.coherence_length();
  const double du = 2.0 * std::numbers::pi / (n * D);
  std::vector<double> sk;  // sinc^2(pi k / n), k >= 0

  OffsetTable out;
  out.periodic = true;
  Eigen::MatrixXd constant = Eigen::MatrixXd::Zero(n, n);
  constant(0, 0) = 0.5 * s.asymptotic_green();

  std::vector<double> cosines(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) {
    for (int m = 0; m < n; ++m) cosines[static_cast<std::size_t>(r * n + m)] = std::cos(2.0 * std::numbers::pi * r * m / n);
  }

  auto lattice_sum = [&](double uc, double& table_err) {
    const detail::TaperedTable table(s, uc, 2.0 * uc);
    table_err = table.max_error();
    const auto kmax = static_cast<long>(std::ceil(2.0 * uc / du));
    sk.resize(static_cast<std::size_t>(kmax + 1));
    for (long k = 0; k <= kmax; ++k) {
      const double v = detail::sinc(std::numbers::pi * static_cast<double>(k) / n);
      sk[static_cast<std::size_t>(k)] = v * v;
    }
    // Fold by residue; k and -k share residues' cosines.
    Eigen::MatrixXd folded = Eigen::MatrixXd::Zero(n, n);
    for (long kx = 0; kx <= kmax; ++kx) {
      const double wx = (kx == 0 ? 1.0 : 2.0) * sk[static_cast<std::size_t>(kx)];
      const auto rx = static_cast<Eigen::Index>(kx % n);
      const double tx = du * du * static_cast<double>(kx * kx);
      for (long ky = 0; ky <= kmax; ++ky) {
        const double t = tx + du * du * static_cast<double>(ky * ky);
        const double hv = table(t);
        if (hv == 0.0 && ky > 0) break;
        const double wy = (ky == 0 ? 1.0 : 2.0) * sk[static_cast<std::size_t>(ky)];
        folded(rx, static_cast<Eigen::Index>(ky % n)) += wx * wy * hv;
      }
    }
    Eigen::MatrixXd c = constant;
    const double norm = 0.5 / (static_cast<double>(n) * n);
    for (int mx = 0; mx < n; ++mx) {
      for (int my = 0; my < n; ++my) {
        double acc = 0.0;
        for (int rx = 0; rx < n; ++rx) {
          for (int ry = 0; ry < n; ++ry) {
            acc += folded(rx, ry) * cosines[static_cast<std::size_t>(rx * n + mx)] *
                   cosines[static_cast<std::size_t>(ry * n + my)];
          }
        }
        c(mx, my) += norm * acc;
      }
    }
    return c;
  };

  if (s.model() == SqueezingSpectrum::Model::flat && s.lens_curvature() == 0.0) {
    out.values = constant;
    out.converged = true;
    return out;
  }

  double uc = 8.0;
  double err = 0.0;
  double table_err = 0.0;
  Eigen::MatrixXd prev = lattice_sum(uc, table_err);
  double change = 0.0;
  out.cutoff = uc;
  while (true) {
    uc *= 2.0;
    if (uc > opt.max_cutoff) break;
    Eigen::MatrixXd cur = lattice_sum(uc, err);
    table_err = std::max(table_err, err);
    change = (cur - prev).cwiseAbs().maxCoeff();
    prev = cur;
    out.cutoff = uc;
    if (change <= detail::table_tolerance(cur, opt.rel_tol)) {
      out.converged = true;
      break;
    }
  }
  out.values = prev;
  out.error = change + 0.5 * table_err;
  return out;
}

/// Offset table matching the grid's boundary conditions.
inline OffsetTable squeezed_offset_table(const PixelGrid& grid, const SqueezingSpectrum& s,
                                         const QuadratureOptions& opt = {}) {
  return grid.periodic ? torus_offset_table(s, grid.delta, grid.n_side, opt)
                       : plane_offset_table(s, grid.delta, grid.n_side - 1, opt);
}

inline Eigen::MatrixXd expand_offsets(const PixelGrid& grid, const OffsetTable& table) {
  const int n = grid.size();
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto [dx, dy] = grid.offset(i, j);
      c(i, j) = table.at(dx, dy);
    }
  }
  return c;
}

inline CovarianceEstimate cov_squeezed(const PixelGrid& grid, const SqueezingSpectrum& s, int i, int j,
                                       const QuadratureOptions& opt = {}) {
  if (i < 0 || j < 0 || i >= grid.size() || j >= grid.size()) throw std::out_of_range("cov_squeezed: bad pixel index");
  const auto [dx, dy] = grid.offset(i, j);
  if (grid.periodic) {
    const OffsetTable t = torus_offset_table(s, grid.delta, grid.n_side, opt);
    return {t.at(dx, dy), t.error, t.converged};
  }
  const OffsetTable t = plane_offset_table(s, grid.delta, std::max(dx, dy), opt);
  return {t.at(dx, dy), t.error, t.converged};
}

struct DensityNoise {
  double r0 = 0.0;
  double n_a = 0.0;
  double l = 0.0;
  double lambda = 0.0;
};

struct NoiseCovariance {
  Eigen::MatrixXd cx;
  Eigen::MatrixXd cp;
  /// Quadrature error estimate of the squeezed-light part (0 for vacuum light).
  double error = 0.0;
  bool converged = true;
};

/// C^X and C^P of the write + readout channel: C^P = atom X variance * I +
/// C_sq, C^X = density-noise estimate on the diagonal (0 when not requested).
/// Without a spectrum the readout light is vacuum and C_sq = I/2 exactly.
inline NoiseCovariance assemble(const PixelGrid& grid, const std::optional<SqueezingSpectrum>& spectrum,
                                const AtomInit& atoms, const std::optional<DensityNoise>& density = std::nullopt,
                                const QuadratureOptions& opt = {}) {
  const int n = grid.size();
  NoiseCovariance out;
  out.cx = Eigen::MatrixXd::Zero(n, n);
  if (spectrum) {
    const OffsetTable t = squeezed_offset_table(grid, *spectrum, opt);
    out.cp = expand_offsets(grid, t);
    out.error = t.error;
    out.converged = t.converged;
  } else {
    out.cp = kVacuumVariance * Eigen::MatrixXd::Identity(n, n);
  }
  out.cp.diagonal().array() += atoms.x_variance();
  if (density) {
    out.cx.diagonal().setConstant(density_noise_diag(density->r0, density->n_a, density->l, density->lambda));
  }
  return out;
}

}  // namespace qholo
