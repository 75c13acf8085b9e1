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

// Experiment drivers behind the command-line tool: configuration, parameter
// sweeps, the built-in verification suite and CSV/JSON output.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qholo/fidelity.hpp"
#include "qholo/gaussian.hpp"
#include "qholo/oracle.hpp"
#include "qholo/pixel_noise.hpp"
#include "qholo/protocol.hpp"
#include "qholo/squeezing.hpp"

namespace qholo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 12 significant digits, shortest form, independent of the global locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return {buf, res.ptr};
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "limits", "verify", "channel-mc"};
  return names;
}

struct ExperimentConfig {
  std::string experiment = "fig3";
  double r0 = std::log(3.0);
  double psi0 = std::numbers::pi / 2.0;
  bool lens = true;
  double d_min = 0.05;
  double d_max = 50.0;
  int points = 60;
  /// Pixels per side; 0 picks the experiment default.
  int grid = 0;
  bool periodic = false;
  std::string atom_init = "coherent";
  double atom_var = 1e-6;
  std::int64_t mc_samples = 100000;
  std::uint64_t seed = 20260101;
  /// Coherence length; D values are pixel sides in these units.
  double l_d = 1.0;
  double rel_tol = 1e-6;
  /// n_a * l * lambda of the atomic layer; 0 leaves the density term out.
  double density_nal = 0.0;
  /// verify only: add a non-symplectic map to the checked set.
  bool inject_nonsymplectic = false;
  // Not part of the result: excluded from the echo and hash.
  std::string out;
  int threads = 1;
};

inline int resolved_grid(const ExperimentConfig& c) {
  if (c.grid > 0) return c.grid;
  if (c.experiment == "fig3") return 8;
  if (c.experiment == "channel-mc") return 2;
  return 1;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

using ConfigMap = std::map<std::string, std::string>;

/// Flat key = value lines; '#' starts a comment. Keys use underscores
/// (d_min, atom_init, ...); dashes are accepted and normalized.
inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Applies key/value pairs on top of `cfg` and validates the result.
inline void apply_config(ExperimentConfig& cfg, const ConfigMap& values) {
  using namespace detail;
  for (const auto& [key, v] : values) {
    if (key == "experiment") cfg.experiment = v;
    else if (key == "r0") cfg.r0 = parse_double(key, v);
    else if (key == "psi0") cfg.psi0 = parse_double(key, v);
    else if (key == "lens") cfg.lens = parse_bool(key, v);
    else if (key == "d_min") cfg.d_min = parse_double(key, v);
    else if (key == "d_max") cfg.d_max = parse_double(key, v);
    else if (key == "points") cfg.points = static_cast<int>(parse_int(key, v));
    else if (key == "grid") cfg.grid = static_cast<int>(parse_int(key, v));
    else if (key == "periodic") cfg.periodic = parse_bool(key, v);
    else if (key == "atom_init") cfg.atom_init = v;
    else if (key == "atom_var") cfg.atom_var = parse_double(key, v);
    else if (key == "mc_samples") cfg.mc_samples = parse_int(key, v);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "l_d") cfg.l_d = parse_double(key, v);
    else if (key == "rel_tol") cfg.rel_tol = parse_double(key, v);
    else if (key == "density_nal") cfg.density_nal = parse_double(key, v);
    else if (key == "inject_nonsymplectic") cfg.inject_nonsymplectic = parse_bool(key, v);
    else if (key == "out") cfg.out = v;
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(key, v));
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
  }
  if (!(cfg.r0 >= 0.0)) throw ConfigError("config: r0 must be >= 0");
  if (!(cfg.d_min > 0.0) || !(cfg.d_max >= cfg.d_min)) throw ConfigError("config: need 0 < d_min <= d_max");
  if (cfg.points < 1) throw ConfigError("config: points must be >= 1");
  if (cfg.grid < 0 || cfg.grid > 64) throw ConfigError("config: grid must be in [1, 64]");
  if (cfg.atom_init != "coherent" && cfg.atom_init != "squeezed") {
    throw ConfigError("config: atom_init must be coherent or squeezed");
  }
  if (!(cfg.atom_var > 0.0) || cfg.atom_var > kVacuumVariance) throw ConfigError("config: atom_var must lie in (0, 0.5]");
  if (cfg.mc_samples < 2) throw ConfigError("config: mc_samples must be >= 2");
  if (!(cfg.l_d > 0.0)) throw ConfigError("config: l_d must be > 0");
  if (!(cfg.rel_tol > 0.0)) throw ConfigError("config: rel_tol must be > 0");
  if (cfg.density_nal < 0.0) throw ConfigError("config: density_nal must be >= 0");
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
}

/// Every setting that can change a result, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"r0", format_number(c.r0)},
          {"psi0", format_number(c.psi0)},
          {"lens", c.lens ? "true" : "false"},
          {"d_min", format_number(c.d_min)},
          {"d_max", format_number(c.d_max)},
          {"points", std::to_string(c.points)},
          {"grid", std::to_string(resolved_grid(c))},
          {"periodic", c.periodic ? "true" : "false"},
          {"atom_init", c.atom_init},
          {"atom_var", format_number(c.atom_var)},
          {"mc_samples", std::to_string(c.mc_samples)},
          {"seed", std::to_string(c.seed)},
          {"l_d", format_number(c.l_d)},
          {"rel_tol", format_number(c.rel_tol)},
          {"density_nal", format_number(c.density_nal)},
          {"inject_nonsymplectic", c.inject_nonsymplectic ? "true" : "false"}};
}

/// FNV-1a (64 bit) of the canonical key=value echo, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& [k, v] : config_entries(c)) {
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Log-spaced D values, d_min first.
inline std::vector<double> sweep_values(const ExperimentConfig& c) {
  std::vector<double> d(static_cast<std::size_t>(c.points));
  if (c.points == 1) {
    d[0] = c.d_min;
    return d;
  }
  const double ratio = std::log(c.d_max / c.d_min);
  for (int i = 0; i < c.points; ++i) d[i] = c.d_min * std::exp(ratio * i / (c.points - 1));
  d.back() = c.d_max;
  return d;
}

/// Runs f(i) for i in [0, n) on `threads` workers; results land by index.
inline void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  Table table;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  int exit_code = 0;
};

inline std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else return v;
      },
      c);
}

// ---------------------------------------------------------------------------
// Experiments

inline SqueezingSpectrum base_spectrum(const ExperimentConfig& c, double r0) {
  return with_psi0(opa_spectrum(r0, c.l_d), c.psi0);
}

inline SqueezingSpectrum configured_spectrum(const ExperimentConfig& c, double r0, bool lens) {
  const SqueezingSpectrum s = base_spectrum(c, r0);
  return lens ? lens_correct(s) : s;
}

inline QuadratureOptions quadrature_options(const ExperimentConfig& c) {
  QuadratureOptions o;
  o.rel_tol = c.rel_tol;
  return o;
}

inline std::optional<DensityNoise> density_noise(const ExperimentConfig& c, double r0) {
  if (c.density_nal <= 0.0) return std::nullopt;
  return DensityNoise{r0, c.density_nal, 1.0, 1.0};
}

inline FidelityResult grid_fidelity(const PixelGrid& grid, const NoiseCovariance& noise) {
  return grid.periodic ? fidelity_circulant(noise, grid) : fidelity_n(noise);
}

/// Single-pixel C_sq versus pixel side, with and without the lens.
inline RunResult run_fig2(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  const SqueezingSpectrum raw = base_spectrum(c, c.r0);
  const SqueezingSpectrum lensed = lens_correct(raw);
  const QuadratureOptions opt = quadrature_options(c);
  const std::vector<double> d = sweep_values(c);
  std::vector<OffsetTable> with(d.size());
  std::vector<OffsetTable> without(d.size());
  parallel_for(static_cast<int>(d.size()), c.threads, [&](int i) {
    with[i] = plane_offset_table(lensed, d[i] * c.l_d, 0, opt);
    without[i] = plane_offset_table(raw, d[i] * c.l_d, 0, opt);
  });
  RunResult r;
  r.table.columns = {"D", "cov_lens", "cov_no_lens", "err_lens", "err_no_lens", "converged", "config_hash"};
  int unconverged = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool ok = with[i].converged && without[i].converged;
    unconverged += ok ? 0 : 1;
    r.table.rows.push_back({d[i], with[i].at(0, 0), without[i].at(0, 0), with[i].error, without[i].error, ok, hash});
  }
  r.summary["unconverged_rows"] = unconverged;
  r.summary["small_pixel_limit"] = 0.5 * lensed.asymptotic_green();
  r.summary["large_pixel_limit"] = 0.5 * lensed.green_u(0.0);
  return r;
}

/// Average fidelity versus pixel side for coherent and squeezed atoms.
inline RunResult run_fig3(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  const SqueezingSpectrum s = configured_spectrum(c, c.r0, c.lens);
  const QuadratureOptions opt = quadrature_options(c);
  const std::vector<double> d = sweep_values(c);
  const int n_side = resolved_grid(c);
  struct Point {
    double coherent = std::nan("");
    double squeezed = std::nan("");
    double error = 0.0;
    bool converged = false;
    std::string failure;
  };
  std::vector<Point> pts(d.size());
  parallel_for(static_cast<int>(d.size()), c.threads, [&](int i) {
    Point& p = pts[i];
    try {
      const PixelGrid grid = PixelGrid::square(n_side, d[i] * c.l_d, c.periodic);
      const OffsetTable table = squeezed_offset_table(grid, s, opt);
      NoiseCovariance noise;
      noise.cx = Eigen::MatrixXd::Zero(grid.size(), grid.size());
      if (auto dn = density_noise(c, c.r0)) {
        noise.cx.diagonal().setConstant(density_noise_diag(dn->r0, dn->n_a, dn->l, dn->lambda));
      }
      const Eigen::MatrixXd csq = expand_offsets(grid, table);
      noise.cp = csq;
      noise.cp.diagonal().array() += AtomInit::coherent().x_variance();
      p.coherent = grid_fidelity(grid, noise).f_av;
      noise.cp = csq;
      noise.cp.diagonal().array() += AtomInit::squeezed(c.atom_var).x_variance();
      p.squeezed = grid_fidelity(grid, noise).f_av;
      p.error = table.error;
      p.converged = table.converged;
    } catch (const std::exception& e) {
      p.failure = e.what();
    }
  });
  RunResult r;
  r.table.columns = {"D", "f_av_coherent", "f_av_squeezed", "f_classical_benchmark", "quad_error", "converged",
                     "config_hash"};
  int unconverged = 0;
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    unconverged += pts[i].converged ? 0 : 1;
    if (!pts[i].failure.empty()) failures.push_back({{"D", d[i]}, {"error", pts[i].failure}});
    r.table.rows.push_back({d[i], pts[i].coherent, pts[i].squeezed, classical_benchmark(), pts[i].error,
                            pts[i].converged, hash});
  }
  r.summary["grid"] = n_side;
  r.summary["unconverged_rows"] = unconverged;
  r.summary["failures"] = failures;
  return r;
}

struct LimitCase {
  std::string name;
  double d;
  double r0;
  AtomInit atoms;
  double target;
  bool informational;
};

inline std::vector<LimitCase> limit_cases() {
  const double half = std::sqrt(0.5);
  const double two_thirds = std::sqrt(2.0 / 3.0);
  return {{"small_pixel_coherent", 0.02, 0.0, AtomInit::coherent(), half, false},
          {"large_pixel_coherent", 50.0, 6.0, AtomInit::coherent(), two_thirds, false},
          {"large_pixel_squeezed", 50.0, 6.0, AtomInit::squeezed(1e-6), 1.0, false},
          {"small_pixel_squeezed", 0.02, 0.0, AtomInit::squeezed(1e-6), two_thirds, false},
          {"small_pixel_coherent_r6", 0.02, 6.0, AtomInit::coherent(), half, true},
          {"small_pixel_squeezed_r6", 0.02, 6.0, AtomInit::squeezed(1e-6), two_thirds, true}};
}

inline constexpr double kLimitTolerance = 5e-3;

/// Analytic small- and large-pixel limits of the average fidelity.
inline RunResult run_limits(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  const std::vector<LimitCase> cases = limit_cases();
  const int n_side = resolved_grid(c);
  const QuadratureOptions opt = quadrature_options(c);
  std::vector<std::pair<double, bool>> f(cases.size());
  parallel_for(static_cast<int>(cases.size()), c.threads, [&](int i) {
    const LimitCase& lc = cases[i];
    const PixelGrid grid = PixelGrid::square(n_side, lc.d * c.l_d, c.periodic);
    const NoiseCovariance noise =
        assemble(grid, configured_spectrum(c, lc.r0, c.lens), lc.atoms, density_noise(c, lc.r0), opt);
    f[i] = {grid_fidelity(grid, noise).f_av, noise.converged};
  });
  RunResult r;
  r.table.columns = {"case", "D", "r0", "atom_init", "f_av", "target", "tolerance", "pass", "informational",
                     "converged", "config_hash"};
  int failed = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const LimitCase& lc = cases[i];
    const bool pass = std::abs(f[i].first - lc.target) <= kLimitTolerance;
    if (!pass && !lc.informational) ++failed;
    r.table.rows.push_back({lc.name, lc.d, lc.r0,
                            std::string(lc.atoms.kind == AtomInit::Kind::coherent ? "coherent" : "squeezed"),
                            f[i].first, lc.target, kLimitTolerance, pass, lc.informational, f[i].second, hash});
  }
  r.summary["failed_cases"] = failed;
  return r;
}

// --- Monte-Carlo channel check ---------------------------------------------

/// Pure Gaussian readout light with pixel X covariance `cx`: P covariance
/// cx^{-1}/4, no X-P correlations.
inline GaussianState readout_light_state(const Eigen::MatrixXd& cx) {
  const Eigen::Index n = cx.rows();
  std::vector<ModeLabel> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back({ModeKind::light, Stage::read, static_cast<int>(i)});
  const Eigen::MatrixXd cp = 0.25 * cx.inverse();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      cov(2 * i, 2 * j) = cx(i, j);
      cov(2 * i + 1, 2 * j + 1) = cp(i, j);
    }
  }
  return GaussianState(Eigen::VectorXd::Zero(2 * n), symmetrized(cov), std::move(labels));
}

struct ChannelMcResult {
  MemoryChannel channel;
  /// Empirical covariance of (F_X, F_P) = out - in, per pixel interleaved.
  Eigen::MatrixXd empirical;
  /// Largest |X_out - X_in| over all samples.
  double max_x_residual = 0.0;
  /// Largest |P_out - P_in - X_A^W - X_L^R| over all samples.
  double max_p_residual = 0.0;
  double z_score = 0.0;
  std::int64_t samples = 0;
};

/// Samples signal + environment, pushes every draw through the composed
/// write/readout map and compares the added noise with the closed form.
inline ChannelMcResult channel_monte_carlo(const MemoryChannel& ch, std::int64_t samples, std::uint64_t seed) {
  const int n = ch.n_pixels;
  std::vector<ModeLabel> sig;
  for (int i = 0; i < n; ++i) sig.push_back({ModeKind::light, Stage::write, i});
  GaussianState signal = make_vacuum(sig);
  Eigen::VectorXd alpha(2 * n);
  for (int i = 0; i < n; ++i) {
    alpha(2 * i) = 1.5 - 0.25 * i;
    alpha(2 * i + 1) = -0.5 + 0.125 * i;
  }
  signal = GaussianState(alpha, signal.cov(), sig);
  const GaussianState joint = tensor_product(signal, ch.environment).marginal(ch.full_labels);
  const Eigen::MatrixXd in = sample_state(joint, samples, seed);
  Eigen::MatrixXd out = in * ch.full_map.matrix.transpose();
  if (ch.full_map.added_noise) {
    out += sample_gaussian(Eigen::VectorXd::Zero(joint.dim()), *ch.full_map.added_noise, samples, seed ^ 0x9e3779b97f4a7c15ull);
  }
  ChannelMcResult r{ch, Eigen::MatrixXd(), 0.0, 0.0, 0.0, samples};
  Eigen::MatrixXd f(samples, 2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index sw = 2 * (3 * i);
    const Eigen::Index a = 2 * (3 * i + 1);
    const Eigen::Index lr = 2 * (3 * i + 2);
    f.col(2 * i) = out.col(lr) - in.col(sw);
    f.col(2 * i + 1) = out.col(lr + 1) - in.col(sw + 1);
    r.max_x_residual = std::max(r.max_x_residual, f.col(2 * i).cwiseAbs().maxCoeff());
    if (!ch.full_map.added_noise) {
      r.max_p_residual = std::max(r.max_p_residual, (f.col(2 * i + 1) - in.col(a) - in.col(lr)).cwiseAbs().maxCoeff());
    }
  }
  r.empirical = empirical_covariance(f);
  // z-score on the P block; the X block is checked sample by sample.
  Eigen::MatrixXd emp_p(n, n);
  Eigen::MatrixXd exp_p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      emp_p(i, j) = r.empirical(2 * i + 1, 2 * j + 1);
      exp_p(i, j) = ch.closed_form_noise(2 * i + 1, 2 * j + 1);
    }
  }
  r.z_score = covariance_z_score(emp_p, exp_p, samples);
  return r;
}

inline constexpr double kMcSigma = 5.0;

inline MemoryChannel configured_channel(const ExperimentConfig& c, double d, int n_side,
                                        const WarningSink& warn = stderr_warning_sink) {
  const PixelGrid grid = PixelGrid::square(n_side, d * c.l_d, c.periodic);
  Eigen::MatrixXd cx = kVacuumVariance * Eigen::MatrixXd::Identity(grid.size(), grid.size());
  if (c.r0 > 0.0) cx = expand_offsets(grid, squeezed_offset_table(grid, configured_spectrum(c, c.r0, c.lens)));
  const AtomInit atoms = c.atom_init == "squeezed" ? AtomInit::squeezed(c.atom_var) : AtomInit::coherent();
  return memory_channel(ProtocolParams{}, grid.size(), atoms, readout_light_state(cx), warn);
}

/// Monte-Carlo check of the memory channel at D = d_min.
inline RunResult run_channel_mc(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  const int n_side = resolved_grid(c);
  const MemoryChannel ch = configured_channel(c, c.d_min, n_side);
  const ChannelMcResult mc = channel_monte_carlo(ch, c.mc_samples, c.seed);
  RunResult r;
  r.table.columns = {"quantity", "i", "j", "analytic", "empirical", "config_hash"};
  const int n = ch.n_pixels;
  for (int q = 0; q < 2; ++q) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        r.table.rows.push_back({std::string(q == 0 ? "F_X" : "F_P"), std::int64_t{i}, std::int64_t{j},
                                ch.closed_form_noise(2 * i + q, 2 * j + q), mc.empirical(2 * i + q, 2 * j + q), hash});
      }
    }
  }
  const bool pass = mc.z_score < kMcSigma && mc.max_x_residual <= 1e-12 && mc.max_p_residual <= 1e-12;
  r.summary["z_score_p"] = mc.z_score;
  r.summary["max_x_residual"] = mc.max_x_residual;
  r.summary["max_p_residual"] = mc.max_p_residual;
  r.summary["pass"] = pass;
  r.exit_code = pass ? 0 : 1;
  return r;
}

// --- verify ----------------------------------------------------------------

struct VerifyCheck {
  std::string name;
  double measured;
  double threshold;
  bool pass;
};

inline std::vector<VerifyCheck> verify_checks(const ExperimentConfig& c) {
  std::vector<VerifyCheck> out;
  auto below = [&](std::string name, double measured, double threshold) {
    out.push_back({std::move(name), measured, threshold, measured < threshold});
  };
  const int n = 4;
  const ProtocolParams params;
  std::vector<std::pair<std::string, SymplecticMap>> maps{{"symplectic_pass", pass_map(params, n)},
                                                          {"symplectic_rotation", rotation_map(n)},
                                                          {"symplectic_stage", stage_map(params, n)}};
  if (c.inject_nonsymplectic) {
    maps.emplace_back("symplectic_injected", SymplecticMap{2.0 * Eigen::MatrixXd::Identity(2, 2), std::nullopt});
  }
  for (const auto& [name, m] : maps) {
    const SymplecticCheck chk = check_symplectic(m);
    out.push_back({name, chk.max_deviation, kSymplecticTolerance, chk.passed});
  }
  const Eigen::MatrixXd rot = rotation_map(n).matrix;
  below("rotation_order_four", (rot * rot * rot * rot - Eigen::MatrixXd::Identity(4 * n, 4 * n)).cwiseAbs().maxCoeff(),
        1e-15);
  below("stage_closed_form", (stage_map(params, n).matrix - stage_closed_form(n).matrix).cwiseAbs().maxCoeff(), 1e-12);

  // Channel algebra with correlated squeezed readout light on 2 x 2 pixels.
  ExperimentConfig cc = c;
  cc.periodic = false;
  const MemoryChannel ch = configured_channel(cc, 1.0, 2);
  double x_map = 0.0;
  for (int i = 0; i < ch.n_pixels; ++i) {
    for (int j = 0; j < 2 * ch.n_pixels; ++j) x_map = std::max(x_map, std::abs(ch.signal_map(2 * i, j) - (j == 2 * i)));
  }
  below("channel_x_identity", x_map, 1e-12);
  below("channel_noise_closed_form", (ch.added_noise - ch.closed_form_noise).cwiseAbs().maxCoeff(), 1e-12);
  const ChannelMcResult mc = channel_monte_carlo(ch, c.mc_samples, c.seed);
  below("channel_mc_z_score", mc.z_score, kMcSigma);
  below("channel_mc_x_residual", mc.max_x_residual, 1e-12);

  const SqueezingSpectrum raw = base_spectrum(c, std::log(3.0));
  const SqueezingSpectrum lensed = lens_correct(raw);
  below("lens_stationary", std::abs(lensed.psi_curvature_fd()) / std::abs(raw.psi_curvature_fd()), 1e-6);
  double unitarity = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const Bogoliubov b = opa_bogoliubov(0.01 * k, std::log(3.0));
    unitarity = std::max(unitarity, std::abs(std::norm(b.u) - std::norm(b.v) - 1.0));
  }
  below("opa_unitarity", unitarity, 1e-10);

  // Spectral pixel covariance against the real-space double surface integral.
  const double d = 1.0;
  const OffsetTable spectral = plane_offset_table(lensed, d * c.l_d, 1);
  const RadialCorrelation h(lensed, std::hypot(2.0, 1.0) * d + 0.05);
  double oracle = 0.0;
  for (const auto& [mx, my] : {std::pair{0, 0}, std::pair{1, 0}}) {
    const double ref = realspace_pixel_covariance(lensed, h, d, mx, my);
    oracle = std::max(oracle, std::abs(spectral.at(mx, my) - ref) / std::abs(ref));
  }
  below("pixel_covariance_oracle", oracle, 1e-5);

  const PixelGrid torus = PixelGrid::square(8, 1.0 * c.l_d, true);
  const NoiseCovariance noise = assemble(torus, lensed, AtomInit::coherent());
  below("dense_vs_circulant", std::abs(fidelity_n(noise).f_n - fidelity_circulant(noise, torus).f_n), 1e-6);
  below("dense_vs_circulant_log",
        std::abs(fidelity_n(noise).log_f_n - fidelity_circulant(noise, torus).log_f_n), 1e-8);
  return out;
}

inline RunResult run_verify(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  RunResult r;
  r.table.columns = {"check", "measured", "threshold", "pass", "config_hash"};
  int failed = 0;
  for (const VerifyCheck& v : verify_checks(c)) {
    failed += v.pass ? 0 : 1;
    r.table.rows.push_back({v.name, v.measured, v.threshold, v.pass, hash});
  }
  r.summary["failed_checks"] = failed;
  r.exit_code = failed == 0 ? 0 : 1;
  return r;
}

inline RunResult run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "fig2") return run_fig2(c);
  if (c.experiment == "fig3") return run_fig3(c);
  if (c.experiment == "limits") return run_limits(c);
  if (c.experiment == "verify") return run_verify(c);
  if (c.experiment == "channel-mc") return run_channel_mc(c);
  throw ConfigError("unknown experiment '" + c.experiment + "'");
}

// --- output ----------------------------------------------------------------

inline std::string to_csv(const ExperimentConfig& c, const Table& t) {
  std::ostringstream os;
  for (const auto& [k, v] : config_entries(c)) os << "# " << k << '=' << v << '\n';
  os << "# config_hash=" << config_hash(c) << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string to_json(const ExperimentConfig& c, const RunResult& r, const std::string& csv_name) {
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment;
  j["csv"] = csv_name;
  j["config_hash"] = config_hash(c);
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_entries(c)) cfg[k] = v;
  j["config"] = cfg;
  j["columns"] = r.table.columns;
  j["rows"] = r.table.rows.size();
  j["summary"] = r.summary;
  j["exit_code"] = r.exit_code;
  return j.dump(2) + "\n";
}

inline std::string default_output_path(const ExperimentConfig& c) { return c.out.empty() ? c.experiment + ".csv" : c.out; }

/// Metadata file next to the CSV: same stem, .json extension.
inline std::string metadata_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return csv_path.substr(0, dot) + ".json";
  return csv_path + ".json";
}

/// Writes the CSV and its JSON sidecar; returns the two paths.
inline std::pair<std::string, std::string> write_outputs(const ExperimentConfig& c, const RunResult& r) {
  const std::string csv = default_output_path(c);
  const std::string meta = metadata_path(csv);
  {
    std::ofstream f(csv, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + csv);
    f << to_csv(c, r.table);
  }
  {
    std::ofstream f(meta, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + meta);
    const auto slash = csv.find_last_of('/');
    f << to_json(c, r, slash == std::string::npos ? csv : csv.substr(slash + 1));
  }
  return {csv, meta};
}

}  // namespace qholo
