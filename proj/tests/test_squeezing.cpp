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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "qholo/squeezing.hpp"

namespace qholo {
namespace {

const double kLn3 = std::log(3.0);
constexpr double kPi = std::numbers::pi;

TEST(GreenX, WorkedExamples) {
  EXPECT_NEAR(green_x(kLn3, kPi / 2.0), 1.0 / 9.0, 1e-14);
  EXPECT_NEAR(green_x(kLn3, 0.0), 9.0, 1e-12);
  EXPECT_NEAR(green_x(0.0, 0.7), 1.0, 1e-15);
}

TEST(Opa, ZeroGainIsVacuum) {
  const SqueezingSpectrum s = opa_spectrum(0.0, 1.0);
  for (double u = 0.0; u <= 10.0; u += 0.37) {
    EXPECT_NEAR(s.green_u(u), 1.0, 1e-15);
    EXPECT_EQ(s.r_u(u), 0.0);
  }
}

TEST(Opa, UnitarityOnWideRange) {
  for (double g : {0.1, kLn3, 3.0, 6.0}) {
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const Bogoliubov b = opa_bogoliubov(0.005 * k, g);
      worst = std::max(worst, std::abs(std::norm(b.u) - std::norm(b.v) - 1.0) / std::max(1.0, std::norm(b.u)));
    }
    EXPECT_LT(worst, 1e-10) << g;
  }
}

TEST(Opa, ContinuousAcrossGainBranchPoint) {
  auto at_theta = [](double theta, double g) { return opa_bogoliubov(std::sqrt(theta), g); };
  for (double g : {0.5, kLn3, 2.0}) {
    const Bogoliubov mid = at_theta(2.0 * g, g);
    for (double dt : {1e-9, 1e-11}) {
      for (double sign : {-1.0, 1.0}) {
        const Bogoliubov b = at_theta(2.0 * g + sign * dt, g);
        EXPECT_LT(std::abs(b.u - mid.u), 1e-8);
        EXPECT_LT(std::abs(b.v - mid.v), 1e-8);
      }
    }
    // Either side of the switch to the series, |Gamma| = 1e-4.
    for (double sign : {-1.0, 1.0}) {
      const double lo = 2.0 * std::sqrt(g * g - sign * 1e-8 * (1.0 - 1e-9));
      const double hi = 2.0 * std::sqrt(g * g - sign * 1e-8 * (1.0 + 1e-9));
      EXPECT_LT(std::abs(at_theta(lo, g).u - at_theta(hi, g).u), 1e-8);
      EXPECT_LT(std::abs(at_theta(lo, g).v - at_theta(hi, g).v), 1e-8);
    }
  }
}

TEST(Opa, CentreSqueezingMatchesGain) {
  const SqueezingSpectrum s = opa_spectrum(kLn3, 1.0);
  EXPECT_NEAR(s.r_u(0.0), kLn3, 1e-12);
  EXPECT_NEAR(s.psi_u(0.0), kPi / 2.0, 1e-12);
  EXPECT_NEAR(s.green_u(0.0), 1.0 / 9.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.asymptotic_green(), 1.0);
}

TEST(Opa, GreenIsPhysical) {
  // G_X >= e^{-2 r(u)} > 0 everywhere.
  const SqueezingSpectrum s = opa_spectrum(kLn3, 1.0);
  for (double u = 0.0; u < 12.0; u += 0.013) {
    EXPECT_GE(s.green_u(u), std::exp(-2.0 * s.r_u(u)) - 1e-12) << u;
    EXPECT_NEAR(s.green_u(u), green_x(s.r_u(u), s.psi_u(u)), 1e-10 * std::exp(2.0 * s.r_u(u)));
  }
}

TEST(Opa, CoherenceLengthScalesWaveVector) {
  const SqueezingSpectrum a = opa_spectrum(kLn3, 1.0);
  const SqueezingSpectrum b = opa_spectrum(kLn3, 2.5);
  for (double q : {0.1, 0.7, 2.0}) EXPECT_DOUBLE_EQ(b.green(q), a.green_u(q * 2.5));
}

TEST(Lens, FiniteDifferenceCurvatureMatchesExact) {
  for (double g : {0.2, kLn3, 3.0}) {
    EXPECT_NEAR(opa_spectrum(g, 1.0).psi_curvature_fd(), opa_lens_curvature_exact(g), 1e-9) << g;
  }
  EXPECT_NEAR(opa_lens_curvature_exact(kLn3), 0.317952154675, 1e-11);
}

TEST(Lens, CorrectionMakesOrientationStationary) {
  const SqueezingSpectrum raw = opa_spectrum(kLn3, 1.0);
  const SqueezingSpectrum lensed = lens_correct(raw);
  EXPECT_LT(std::abs(lensed.psi_curvature_fd()), 1e-6 * std::abs(raw.psi_curvature_fd()));
  EXPECT_NEAR(lensed.lens_curvature(), opa_lens_curvature_exact(kLn3), 1e-9);
  // r is untouched.
  for (double u : {0.0, 0.5, 2.0}) EXPECT_DOUBLE_EQ(lensed.r_u(u), raw.r_u(u));
}

TEST(Lens, ReducesNoiseAtLowFrequencies) {
  // Holds up to u ~ 2.58; beyond that the lens moves an anti-squeezed lobe.
  const SqueezingSpectrum raw = opa_spectrum(kLn3, 1.0);
  const SqueezingSpectrum lensed = lens_correct(raw);
  for (double u = 0.0; u <= 2.5; u += 0.01) EXPECT_LE(lensed.green_u(u), raw.green_u(u) + 1e-12) << u;
}

TEST(Lens, IdempotentOnFlatSpectrum) {
  const SqueezingSpectrum f = flat_spectrum(0.5, kPi / 2.0, 1.0);
  EXPECT_EQ(lens_correct(f).lens_curvature(), 0.0);
  EXPECT_NEAR(f.green_u(3.0), std::exp(-1.0), 1e-14);
}

TEST(Psi0, OffsetsOrientation) {
  const SqueezingSpectrum s = with_psi0(opa_spectrum(kLn3, 1.0), 0.0);
  EXPECT_NEAR(s.psi_u(0.0), 0.0, 1e-12);
  EXPECT_NEAR(s.green_u(0.0), 9.0, 1e-10);
}

TEST(Custom, TableReproducesFlatModel) {
  const std::vector<double> u{0.0, 1.0, 2.0, 4.0};
  const SqueezingSpectrum s = SqueezingSpectrum::custom(u, {0.4, 0.4, 0.4, 0.4}, u, {kPi / 2, kPi / 2, kPi / 2, kPi / 2}, 1.0);
  for (double x : {0.0, 0.5, 3.3, 9.0}) EXPECT_NEAR(s.green_u(x), std::exp(-0.8), 1e-12);
}

TEST(Custom, LoadsTablesFromFiles) {
  const std::string rpath = ::testing::TempDir() + "qholo_r.txt";
  const std::string ppath = ::testing::TempDir() + "qholo_psi.txt";
  {
    std::ofstream r(rpath);
    r << "# u r\n0 1.0\n1, 0.5\n2 0.0\n3 0.0\n";
    std::ofstream p(ppath);
    p << "0 1.5707963267948966\n1 1.5707963267948966\n2 1.5707963267948966\n3 1.5707963267948966\n";
  }
  const SqueezingSpectrum s = load_custom_spectrum(rpath, ppath, 1.0);
  EXPECT_NEAR(s.r_u(0.0), 1.0, 1e-14);
  EXPECT_NEAR(s.r_u(1.0), 0.5, 1e-14);
  EXPECT_NEAR(s.green_u(5.0), 1.0, 1e-14);
  std::remove(rpath.c_str());
  std::remove(ppath.c_str());
  EXPECT_THROW(load_custom_spectrum("/nonexistent/r", "/nonexistent/p", 1.0), std::runtime_error);
}

TEST(Custom, RejectsBadTables) {
  EXPECT_THROW(SqueezingSpectrum::custom({0.0, 1.0}, {0.1, -0.1}, {0.0, 1.0}, {0.0, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(SqueezingSpectrum::custom({0.0, 0.0}, {0.1, 0.1}, {0.0, 1.0}, {0.0, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(opa_spectrum(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(opa_spectrum(1.0, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace qholo
