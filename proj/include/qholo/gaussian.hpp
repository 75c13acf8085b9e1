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

// Gaussian states of labeled bosonic / collective-spin modes.
//
// Conventions used throughout qholo:
//   * quadratures are ordered (X_1, P_1, X_2, P_2, ...);
//   * the vacuum (and coherent-state) variance of every quadrature is 1/2,
//     so [X, P] = i and the symplectic form is Omega = diag([[0,1],[-1,0]]).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qholo {

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kSymplecticTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-9;

enum class ModeKind { light, atom };
enum class Stage { write, read };
enum class Quadrature { X, P };

struct ModeLabel {
  ModeKind kind = ModeKind::light;
  Stage stage = Stage::write;
  int pixel = 0;

  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

inline std::string to_string(const ModeLabel& label) {
  std::ostringstream os;
  os << (label.kind == ModeKind::light ? "L" : "A") << '^'
     << (label.stage == Stage::write ? 'W' : 'R') << '[' << label.pixel << ']';
  return os.str();
}

/// Standard symplectic form for `modes` modes in (X,P)-interleaved order.
inline Eigen::MatrixXd symplectic_form(Eigen::Index modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

inline double max_asymmetry(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::vector<ModeLabel> labels)
      : mean_(std::move(mean)), cov_(std::move(cov)), labels_(std::move(labels)) {
    const auto dim = static_cast<Eigen::Index>(2 * labels_.size());
    if (labels_.empty()) throw std::invalid_argument("GaussianState: no modes");
    if (mean_.size() != dim || cov_.rows() != dim || cov_.cols() != dim) {
      throw std::invalid_argument("GaussianState: mean/cov dimensions do not match 2 x labels");
    }
    std::set<ModeLabel> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) {
      throw std::invalid_argument("GaussianState: duplicate mode labels");
    }
    if (max_asymmetry(cov_) > kSymmetryTolerance * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("GaussianState: covariance is not symmetric");
    }
    cov_ = symmetrized(cov_);
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const std::vector<ModeLabel>& labels() const { return labels_; }
  Eigen::Index num_modes() const { return static_cast<Eigen::Index>(labels_.size()); }
  Eigen::Index dim() const { return 2 * num_modes(); }

  std::optional<Eigen::Index> find(const ModeLabel& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - labels_.begin());
  }

  Eigen::Index index_of(const ModeLabel& label) const {
    if (auto k = find(label)) return *k;
    throw std::out_of_range("GaussianState: no mode " + to_string(label));
  }

  /// Smallest eigenvalue of the Hermitian matrix cov + (i/2) Omega.
  double uncertainty_margin() const {
    const Eigen::MatrixXcd h =
        cov_.cast<std::complex<double>>() +
        std::complex<double>(0.0, 0.5) * symplectic_form(num_modes()).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  bool is_physical(double tol = kPsdTolerance) const { return uncertainty_margin() >= -tol; }

  /// Reduced state on the given modes, in the order given.
  GaussianState marginal(std::span<const ModeLabel> keep) const {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * keep.size());
    for (const auto& label : keep) {
      const auto k = index_of(label);
      idx.push_back(2 * k);
      idx.push_back(2 * k + 1);
    }
    Eigen::VectorXd m(idx.size());
    Eigen::MatrixXd c(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      m(a) = mean_(idx[a]);
      for (std::size_t b = 0; b < idx.size(); ++b) c(a, b) = cov_(idx[a], idx[b]);
    }
    return GaussianState(std::move(m), std::move(c), {keep.begin(), keep.end()});
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::vector<ModeLabel> labels_;
};

/// Linear quadrature transform, optionally followed by additive classical
/// Gaussian noise with covariance `added_noise`.
struct SymplecticMap {
  Eigen::MatrixXd matrix;
  std::optional<Eigen::MatrixXd> added_noise;

  Eigen::Index dim() const { return matrix.rows(); }
  Eigen::Index num_modes() const { return matrix.rows() / 2; }

  static SymplecticMap identity(Eigen::Index modes) {
    return {Eigen::MatrixXd::Identity(2 * modes, 2 * modes), std::nullopt};
  }
};

struct SymplecticCheck {
  bool passed = false;
  double max_deviation = 0.0;
};

/// Max-norm of S Omega S^T - Omega, pass/fail at `tol`.
inline SymplecticCheck check_symplectic(const SymplecticMap& map, double tol = kSymplecticTolerance) {
  const auto& s = map.matrix;
  if (s.rows() != s.cols()) throw std::invalid_argument("check_symplectic: matrix is not square");
  if (s.rows() % 2 != 0) throw std::invalid_argument("check_symplectic: odd dimension");
  const Eigen::MatrixXd omega = symplectic_form(s.rows() / 2);
  const double dev = s.rows() == 0 ? 0.0 : (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
  return {dev < tol, dev};
}

/// `second` applied after `first`.
inline SymplecticMap compose(const SymplecticMap& first, const SymplecticMap& second) {
  if (first.dim() != second.dim()) throw std::invalid_argument("compose: dimension mismatch");
  SymplecticMap out{second.matrix * first.matrix, std::nullopt};
  if (first.added_noise || second.added_noise) {
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(out.dim(), out.dim());
    if (first.added_noise) noise += second.matrix * *first.added_noise * second.matrix.transpose();
    if (second.added_noise) noise += *second.added_noise;
    out.added_noise = symmetrized(noise);
  }
  return out;
}

/// Lift a map acting on `modes.size()` modes into a `total_modes` system; the
/// k-th mode of `map` acts on mode `modes[k]`, all others are untouched.
inline SymplecticMap embed(const SymplecticMap& map, std::span<const Eigen::Index> modes,
                           Eigen::Index total_modes) {
  if (map.num_modes() != static_cast<Eigen::Index>(modes.size())) {
    throw std::invalid_argument("embed: mode list does not match map size");
  }
  std::vector<Eigen::Index> idx;
  for (auto m : modes) {
    if (m < 0 || m >= total_modes) throw std::out_of_range("embed: mode index out of range");
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  if (std::set<Eigen::Index>(idx.begin(), idx.end()).size() != idx.size()) {
    throw std::invalid_argument("embed: repeated mode index");
  }
  SymplecticMap out = SymplecticMap::identity(total_modes);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) out.matrix(idx[a], idx[b]) = map.matrix(a, b);
  }
  if (map.added_noise) {
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(2 * total_modes, 2 * total_modes);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) noise(idx[a], idx[b]) = (*map.added_noise)(a, b);
    }
    out.added_noise = std::move(noise);
  }
  return out;
}

inline GaussianState make_vacuum(std::vector<ModeLabel> labels) {
  if (labels.empty()) throw std::invalid_argument("make_vacuum: no labels");
  const auto dim = static_cast<Eigen::Index>(2 * labels.size());
  return GaussianState(Eigen::VectorXd::Zero(dim),
                       kVacuumVariance * Eigen::MatrixXd::Identity(dim, dim), std::move(labels));
}

/// Minimum-uncertainty squeezed vacuum on every listed mode: `variance` on the
/// squeezed axis, 1/(4 variance) on the conjugate one.
inline GaussianState make_squeezed_modes(std::vector<ModeLabel> labels, Quadrature axis,
                                         double variance) {
  if (!(variance > 0.0) || variance > kVacuumVariance) {
    throw std::invalid_argument("make_squeezed_modes: variance must lie in (0, 0.5]");
  }
  GaussianState vac = make_vacuum(std::move(labels));
  Eigen::MatrixXd cov = vac.cov();
  const double anti = 0.25 / variance;
  for (Eigen::Index k = 0; k < vac.num_modes(); ++k) {
    cov(2 * k, 2 * k) = axis == Quadrature::X ? variance : anti;
    cov(2 * k + 1, 2 * k + 1) = axis == Quadrature::X ? anti : variance;
  }
  return GaussianState(vac.mean(), std::move(cov), vac.labels());
}

/// Block-diagonal joint state; labels of `a` come first.
inline GaussianState tensor_product(const GaussianState& a, const GaussianState& b) {
  const Eigen::Index da = a.dim();
  const Eigen::Index db = b.dim();
  Eigen::VectorXd mean(da + db);
  mean << a.mean(), b.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(da + db, da + db);
  cov.topLeftCorner(da, da) = a.cov();
  cov.bottomRightCorner(db, db) = b.cov();
  std::vector<ModeLabel> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return GaussianState(std::move(mean), std::move(cov), std::move(labels));
}

/// mean -> S mean, cov -> S cov S^T + N, symmetrized.
inline GaussianState apply_map(const GaussianState& state, const SymplecticMap& map) {
  if (map.matrix.rows() != state.dim() || map.matrix.cols() != state.dim()) {
    throw std::invalid_argument("apply_map: map dimension does not match state");
  }
  Eigen::MatrixXd cov = map.matrix * state.cov() * map.matrix.transpose();
  if (map.added_noise) {
    if (map.added_noise->rows() != state.dim() || map.added_noise->cols() != state.dim()) {
      throw std::invalid_argument("apply_map: added-noise dimension does not match state");
    }
    cov += *map.added_noise;
  }
  return GaussianState(map.matrix * state.mean(), symmetrized(cov), state.labels());
}

/// Square-root factor L with L L^T = cov, for a PSD covariance.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double tol = kPsdTolerance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(cov));
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.size() > 0 && ev.minCoeff() < -tol * scale) {
    throw std::invalid_argument("covariance is not positive semidefinite");
  }
  return solver.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// `n` draws (one per row) from N(mean, cov). Deterministic for fixed seed.
inline Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                       std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const Eigen::MatrixXd factor = psd_factor(cov);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(mean.size(), n);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = normal(rng);
  }
  Eigen::MatrixXd draws = (factor * z).colwise() + mean;
  return draws.transpose();
}

inline Eigen::MatrixXd sample_state(const GaussianState& state, std::int64_t n, std::uint64_t seed) {
  return sample_gaussian(state.mean(), state.cov(), n, seed);
}

/// Unbiased sample covariance of row-wise draws.
inline Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& draws) {
  const Eigen::RowVectorXd mu = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mu;
  return (centered.transpose() * centered) / static_cast<double>(draws.rows() - 1);
}

/// Largest |empirical - expected| over entries, in units of the Gaussian
/// standard error sqrt((S_ii S_jj + S_ij^2) / n) of a sample covariance.
inline double covariance_z_score(const Eigen::MatrixXd& empirical, const Eigen::MatrixXd& expected,
                                 std::int64_t n) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < expected.rows(); ++i) {
    for (Eigen::Index j = 0; j < expected.cols(); ++j) {
      const double se = std::sqrt((expected(i, i) * expected(j, j) + expected(i, j) * expected(i, j)) /
                                  static_cast<double>(n));
      const double diff = std::abs(empirical(i, j) - expected(i, j));
      if (se > 0.0) {
        worst = std::max(worst, diff / se);
      } else if (diff > 1e-12) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return worst;
}

}  // namespace qholo
