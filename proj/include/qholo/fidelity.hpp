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

// Coherent-state transfer fidelity of the memory channel,
//   F_N = [det(1 + C^X) det(1 + C^P)]^{-1/2},   F_av = F_N^{1/N}.
// Only meaningful for coherent inputs: the channel is a displacement-covariant
// additive-noise channel, so F does not depend on the coherent amplitude.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qholo/pixel_noise.hpp"

namespace qholo {

inline constexpr double kEigenTolerance = 1e-9;
inline constexpr double kTranslationTolerance = 1e-8;

inline double classical_benchmark() { return 0.5; }

struct FidelityResult {
  double f_n = 1.0;
  double f_av = 1.0;
  /// log F_N; F_N itself underflows for large grids.
  double log_f_n = 0.0;
  int n = 0;
  std::vector<double> eigenvalues_x;
  std::vector<double> eigenvalues_p;
};

namespace detail {

inline FidelityResult fidelity_from_spectra(std::vector<double> ex, std::vector<double> ep) {
  if (ex.size() != ep.size() || ex.empty()) throw std::invalid_argument("fidelity: spectra sizes differ or are empty");
  double log_det = 0.0;
  for (const auto* list : {&ex, &ep}) {
    for (double v : *list) {
      if (v < -kEigenTolerance) {
        std::ostringstream os;
        os << "fidelity: noise covariance has eigenvalue " << v << " < 0 (unphysical)";
        throw std::invalid_argument(os.str());
      }
      log_det += std::log1p(std::max(v, 0.0));
    }
  }
  FidelityResult r;
  r.n = static_cast<int>(ex.size());
  r.log_f_n = -0.5 * log_det;
  r.f_n = std::exp(r.log_f_n);
  r.f_av = std::exp(r.log_f_n / r.n);
  r.eigenvalues_x = std::move(ex);
  r.eigenvalues_p = std::move(ep);
  return r;
}

inline std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string("fidelity: ") + name + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance * scale) {
    throw std::invalid_argument(std::string("fidelity: ") + name + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace detail

/// Dense path: symmetric eigen-decomposition of C^X and C^P.
inline FidelityResult fidelity_n(const NoiseCovariance& noise) {
  if (noise.cx.rows() != noise.cp.rows()) throw std::invalid_argument("fidelity_n: C^X and C^P sizes differ");
  return detail::fidelity_from_spectra(detail::symmetric_eigenvalues(noise.cx, "C^X"),
                                       detail::symmetric_eigenvalues(noise.cp, "C^P"));
}

/// Largest deviation of `c` from the block-circulant matrix generated by its
/// first row on a periodic grid.
inline double translation_asymmetry(const Eigen::MatrixXd& c, const PixelGrid& grid) {
  double worst = 0.0;
  const int n = grid.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto [dx, dy] = grid.offset(j, i);
      worst = std::max(worst, std::abs(c(i, j) - c(0, grid.index(dx, dy))));
    }
  }
  return worst;
}

namespace detail {

// Eigenvalues of a block-circulant matrix: 2D DFT of its first row.
inline std::vector<double> circulant_eigenvalues(const Eigen::MatrixXd& c, const PixelGrid& grid, const char* name) {
  if (c.rows() != grid.size() || c.cols() != grid.size()) {
    throw std::invalid_argument(std::string("fidelity_circulant: ") + name + " does not match the grid");
  }
  const double asym = translation_asymmetry(c, grid);
  if (asym > kTranslationTolerance) {
    std::ostringstream os;
    os << "fidelity_circulant: " << name << " is not translation invariant (max deviation " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  const int n = grid.n_side;
  Eigen::FFT<double> fft;
  // rows[y][x] = c(0, (x, y)); transform along x, then along y.
  std::vector<std::vector<std::complex<double>>> rows(static_cast<std::size_t>(n));
  for (int y = 0; y < n; ++y) {
    std::vector<double> line(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) line[static_cast<std::size_t>(x)] = c(0, grid.index(x, y));
    fft.fwd(rows[static_cast<std::size_t>(y)], line);
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n * n));
  double max_imag = 0.0;
  for (int kx = 0; kx < n; ++kx) {
    std::vector<std::complex<double>> col(static_cast<std::size_t>(n));
    for (int y = 0; y < n; ++y) col[static_cast<std::size_t>(y)] = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(kx)];
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, col);
    for (const auto& v : spec) {
      out.push_back(v.real());
      max_imag = std::max(max_imag, std::abs(v.imag()));
    }
  }
  if (max_imag > 1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff()) * n * n) {
    throw std::invalid_argument(std::string("fidelity_circulant: ") + name + " has a non-real spectrum");
  }
  return out;
}

}  // namespace detail

/// Circulant path for periodic grids: eigenvalues are the 2D DFT of the first
/// row, indexed by the quantized wave vector.
inline FidelityResult fidelity_circulant(const NoiseCovariance& noise, const PixelGrid& grid) {
  if (!grid.periodic) throw std::invalid_argument("fidelity_circulant: grid is not periodic");
  return detail::fidelity_from_spectra(detail::circulant_eigenvalues(noise.cx, grid, "C^X"),
                                       detail::circulant_eigenvalues(noise.cp, grid, "C^P"));
}

}  // namespace qholo
