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

// Light/atom interface maps of the two-pass holographic memory.
//
// Every stage map acts on a per-pixel (light, atom) pair. Pixels never couple
// in these maps: diffraction across the atomic layer is neglected, so spatial
// correlations enter only through the initial states.

#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qholo/gaussian.hpp"

namespace qholo {

using WarningSink = std::function<void(std::string_view)>;

inline void stderr_warning_sink(std::string_view message) {
  std::cerr << "qholo warning: " << message << '\n';
}

struct ProtocolParams {
  /// Light/atom coupling; every closed-form memory result assumes 1.
  double kappa = 1.0;
  /// Inject the atomic-density scattering term of each pass as classical
  /// Gaussian noise on X_A.
  bool include_density_term = false;
  /// Variance of the relative local density fluctuation dJ_x / (n_a <J_x>).
  double density_noise_variance = 0.0;
  /// <P_L^2> multiplying the density fluctuation in the scattering term.
  double light_p_variance = kVacuumVariance;

  void validate() const {
    if (!(kappa >= 0.0)) throw std::invalid_argument("ProtocolParams: kappa must be >= 0");
    if (density_noise_variance < 0.0) {
      throw std::invalid_argument("ProtocolParams: density_noise_variance must be >= 0");
    }
    if (light_p_variance < 0.0) throw std::invalid_argument("ProtocolParams: light_p_variance must be >= 0");
  }
};

/// Initial state of the collective atomic spin of every pixel.
struct AtomInit {
  enum class Kind { coherent, squeezed };
  Kind kind = Kind::coherent;
  /// X_A variance when squeezed.
  double variance = kVacuumVariance;

  static AtomInit coherent() { return {Kind::coherent, kVacuumVariance}; }
  static AtomInit squeezed(double var = 1e-6) { return {Kind::squeezed, var}; }

  double x_variance() const { return kind == Kind::coherent ? kVacuumVariance : variance; }
};

/// Labels of the write-stage system, pixel-major: L^W[0], A[0], L^W[1], A[1], ...
inline std::vector<ModeLabel> stage_labels(Stage light_stage, int n_pixels) {
  std::vector<ModeLabel> labels;
  for (int i = 0; i < n_pixels; ++i) {
    labels.push_back({ModeKind::light, light_stage, i});
    labels.push_back({ModeKind::atom, Stage::write, i});
  }
  return labels;
}

namespace detail {

inline void require_pixels(int n_pixels) {
  if (n_pixels < 1) throw std::invalid_argument("protocol: n_pixels must be >= 1");
}

// Index of quadrature q (0 = X, 1 = P) of the light (0) or atom (1) mode of pixel i.
inline Eigen::Index quad(int pixel, int subsystem, int q) { return 4 * pixel + 2 * subsystem + q; }

}  // namespace detail

/// One passage of the signal through the atomic layer:
///   X_L' = X_L + kappa P_A,  P_L' = P_L,  X_A' = X_A + kappa P_L,  P_A' = P_A.
inline SymplecticMap pass_map(const ProtocolParams& params, int n_pixels) {
  params.validate();
  detail::require_pixels(n_pixels);
  using detail::quad;
  SymplecticMap map = SymplecticMap::identity(2 * n_pixels);
  for (int i = 0; i < n_pixels; ++i) {
    map.matrix(quad(i, 0, 0), quad(i, 1, 1)) = params.kappa;
    map.matrix(quad(i, 1, 0), quad(i, 0, 1)) = params.kappa;
  }
  if (params.include_density_term && params.density_noise_variance > 0.0) {
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(4 * n_pixels, 4 * n_pixels);
    const double var =
        params.kappa * params.kappa * params.density_noise_variance * params.light_p_variance;
    for (int i = 0; i < n_pixels; ++i) noise(quad(i, 1, 0), quad(i, 1, 0)) = var;
    map.added_noise = std::move(noise);
  }
  return map;
}

/// pi/2 rotation of both the atomic spin and the light Stokes vector:
/// X -> -P, P -> X on every mode.
inline SymplecticMap rotation_map(int n_pixels) {
  detail::require_pixels(n_pixels);
  SymplecticMap map{Eigen::MatrixXd::Zero(4 * n_pixels, 4 * n_pixels), std::nullopt};
  for (Eigen::Index k = 0; k < 2 * n_pixels; ++k) {
    map.matrix(2 * k, 2 * k + 1) = -1.0;
    map.matrix(2 * k + 1, 2 * k) = 1.0;
  }
  return map;
}

/// Closed form of the three-step stage at kappa = 1 (light and atom swap X,
/// and each P picks up the other's input X).
inline SymplecticMap stage_closed_form(int n_pixels) {
  detail::require_pixels(n_pixels);
  using detail::quad;
  SymplecticMap map{Eigen::MatrixXd::Zero(4 * n_pixels, 4 * n_pixels), std::nullopt};
  for (int i = 0; i < n_pixels; ++i) {
    map.matrix(quad(i, 0, 0), quad(i, 1, 0)) = 1.0;  // X_L' = X_A
    map.matrix(quad(i, 0, 1), quad(i, 1, 1)) = 1.0;  // P_L' = P_A + X_L
    map.matrix(quad(i, 0, 1), quad(i, 0, 0)) = 1.0;
    map.matrix(quad(i, 1, 0), quad(i, 0, 0)) = 1.0;  // X_A' = X_L
    map.matrix(quad(i, 1, 1), quad(i, 0, 1)) = 1.0;  // P_A' = P_L + X_A
    map.matrix(quad(i, 1, 1), quad(i, 1, 0)) = 1.0;
  }
  return map;
}

/// pass -> rotate -> pass. Used unchanged for the write stage and, with the
/// readout light in place of the signal, for the readout stage.
inline SymplecticMap stage_map(const ProtocolParams& params, int n_pixels,
                               const WarningSink& warn = stderr_warning_sink) {
  if (params.kappa != 1.0 && warn) {
    std::ostringstream os;
    os << "kappa = " << params.kappa << " != 1: the closed-form stage map does not apply";
    warn(os.str());
  }
  const SymplecticMap pass = pass_map(params, n_pixels);
  return compose(compose(pass, rotation_map(n_pixels)), pass);
}

/// Physical parameters behind kappa = alpha_0 * eta, used only for the
/// validity advisory. Lengths in any consistent unit.
struct PhysicalParams {
  double wavelength = 0.0;
  double atom_density = 0.0;  // surface density n_a
  double eta = 0.0;           // spontaneous-emission probability
  double pixel_area = 0.0;    // S
  double layer_length = 0.0;  // L
};

inline double resonant_optical_depth(const PhysicalParams& p) {
  return p.wavelength * p.wavelength * p.atom_density / (2.0 * std::numbers::pi);
}

/// Advisory (never fatal) checks of alpha_0 >> 1, eta << 1 and S >> L lambda.
/// "Much greater" is read as a factor of 10.
inline std::vector<std::string> validity_warnings(const PhysicalParams& p) {
  std::vector<std::string> out;
  const double alpha0 = resonant_optical_depth(p);
  if (!(alpha0 >= 10.0)) {
    out.push_back("resonant optical depth alpha_0 = " + std::to_string(alpha0) + " is not >> 1");
  }
  if (!(p.eta <= 0.1)) out.push_back("spontaneous-emission probability eta = " + std::to_string(p.eta) + " is not << 1");
  if (!(p.pixel_area >= 10.0 * p.layer_length * p.wavelength)) {
    out.push_back("pixel area S is not >> L*lambda: diffraction inside the layer is not negligible");
  }
  const double kappa = alpha0 * p.eta;
  if (std::abs(kappa - 1.0) > 0.05) {
    out.push_back("kappa = alpha_0 * eta = " + std::to_string(kappa) + " differs from 1");
  }
  return out;
}

/// Affine write+readout channel seen by the signal light:
///   X_out = signal_map_xx X_in + F_X,   P_out = ... + F_P.
struct MemoryChannel {
  int n_pixels = 0;
  /// 2n x 2n map from L^W(in) to L^R(out), (X,P) interleaved per pixel.
  Eigen::MatrixXd signal_map;
  /// 2n x 2n covariance of (F_X, F_P), interleaved per pixel.
  Eigen::MatrixXd added_noise;
  /// n x n blocks of added_noise: <F_X(i) F_X(j)> and <F_P(i) F_P(j)>.
  Eigen::MatrixXd cx;
  Eigen::MatrixXd cp;
  /// Noise predicted by F_X = 0, F_P = X_A^W(in) + X_L^R(in).
  Eigen::MatrixXd closed_form_noise;
  /// Full composed map on (L^W, A, L^R) pixel-major, for sampling checks.
  SymplecticMap full_map;
  /// Labels for full_map, matching `full_map` ordering.
  std::vector<ModeLabel> full_labels;
  /// Atoms + readout light initial state (signal excluded), labels subset of full_labels.
  GaussianState environment;
};

namespace detail {

inline GaussianState atom_state(const AtomInit& init, int n_pixels) {
  std::vector<ModeLabel> labels;
  for (int i = 0; i < n_pixels; ++i) labels.push_back({ModeKind::atom, Stage::write, i});
  if (init.kind == AtomInit::Kind::coherent) return make_vacuum(std::move(labels));
  return make_squeezed_modes(std::move(labels), Quadrature::X, init.variance);
}

}  // namespace detail

/// Compose write stage, hand-off of the atomic state, and readout stage on
/// the joint system and extract the channel acting on the signal.
inline MemoryChannel memory_channel(const ProtocolParams& params, int n_pixels, const AtomInit& atom_init,
                                    const GaussianState& readout_light,
                                    const WarningSink& warn = stderr_warning_sink) {
  detail::require_pixels(n_pixels);
  if (readout_light.num_modes() != n_pixels) {
    throw std::invalid_argument("memory_channel: readout light must have one mode per pixel");
  }
  std::vector<ModeLabel> light_r;
  for (int i = 0; i < n_pixels; ++i) light_r.push_back({ModeKind::light, Stage::read, i});
  const GaussianState readout = readout_light.marginal(light_r);

  // Joint ordering, pixel-major: L^W[i], A[i], L^R[i].
  std::vector<ModeLabel> labels;
  for (int i = 0; i < n_pixels; ++i) {
    labels.push_back({ModeKind::light, Stage::write, i});
    labels.push_back({ModeKind::atom, Stage::write, i});
    labels.push_back({ModeKind::light, Stage::read, i});
  }
  const auto total = static_cast<Eigen::Index>(labels.size());

  const SymplecticMap stage = stage_map(params, n_pixels, warn);
  std::vector<Eigen::Index> write_modes;
  std::vector<Eigen::Index> read_modes;
  for (int i = 0; i < n_pixels; ++i) {
    write_modes.push_back(3 * i);      // signal light
    write_modes.push_back(3 * i + 1);  // atoms
    read_modes.push_back(3 * i + 2);   // readout light plays the "light" role
    read_modes.push_back(3 * i + 1);   // same atoms, carrying the stored state
  }
  const SymplecticMap full =
      compose(embed(stage, write_modes, total), embed(stage, read_modes, total));

  const GaussianState env = tensor_product(detail::atom_state(atom_init, n_pixels), readout);

  // Push (signal vacuum) x environment through the joint map, then remove the
  // signal's own contribution.
  std::vector<ModeLabel> signal_labels;
  for (int i = 0; i < n_pixels; ++i) signal_labels.push_back({ModeKind::light, Stage::write, i});
  const GaussianState joint_in = tensor_product(make_vacuum(signal_labels), env).marginal(labels);
  const GaussianState joint_out = apply_map(joint_in, full);

  std::vector<Eigen::Index> out_idx;
  std::vector<Eigen::Index> sig_idx;
  for (int i = 0; i < n_pixels; ++i) {
    for (int q = 0; q < 2; ++q) {
      out_idx.push_back(2 * (3 * i + 2) + q);
      sig_idx.push_back(2 * (3 * i) + q);
    }
  }
  const auto n2 = static_cast<Eigen::Index>(out_idx.size());
  Eigen::MatrixXd s(n2, n2);
  Eigen::MatrixXd out_cov(n2, n2);
  Eigen::MatrixXd sig_cov(n2, n2);
  for (Eigen::Index a = 0; a < n2; ++a) {
    for (Eigen::Index b = 0; b < n2; ++b) {
      s(a, b) = full.matrix(out_idx[a], sig_idx[b]);
      out_cov(a, b) = joint_out.cov()(out_idx[a], out_idx[b]);
      sig_cov(a, b) = joint_in.cov()(sig_idx[a], sig_idx[b]);
    }
  }

  MemoryChannel ch{n_pixels, s, symmetrized(out_cov - s * sig_cov * s.transpose()),
                   Eigen::MatrixXd(n_pixels, n_pixels), Eigen::MatrixXd(n_pixels, n_pixels),
                   Eigen::MatrixXd::Zero(n2, n2), full, labels, env};
  for (int i = 0; i < n_pixels; ++i) {
    for (int j = 0; j < n_pixels; ++j) {
      ch.cx(i, j) = ch.added_noise(2 * i, 2 * j);
      ch.cp(i, j) = ch.added_noise(2 * i + 1, 2 * j + 1);
      const double atoms = i == j ? atom_init.x_variance() : 0.0;
      ch.closed_form_noise(2 * i + 1, 2 * j + 1) = atoms + readout.cov()(2 * i, 2 * j);
    }
  }
  return ch;
}

}  // namespace qholo
