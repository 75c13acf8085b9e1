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

// Spectral pixel covariance versus brute-force real-space double surface
// integrals on small pixel pairs.

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "qholo/oracle.hpp"

namespace qholo {
namespace {

struct Case {
  double r0;
  bool lens;
  double d;
};

class RealSpace : public ::testing::TestWithParam<Case> {};

TEST_P(RealSpace, TwoPixelEntriesAgree) {
  const Case c = GetParam();
  SqueezingSpectrum s = opa_spectrum(c.r0, 1.0);
  if (c.lens) s = lens_correct(s);
  const OffsetTable spectral = plane_offset_table(s, c.d, 1);
  const RadialCorrelation h(s, std::sqrt(8.0) * c.d + 0.05);
  for (auto [mx, my] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{1, 1}}) {
    const double ref = realspace_pixel_covariance(s, h, c.d, mx, my);
    const double scale = std::max(std::abs(ref), 1e-3);
    EXPECT_LT(std::abs(spectral.at(mx, my) - ref) / scale, 1e-5) << "offset " << mx << "," << my << " ref " << ref;
  }
}

INSTANTIATE_TEST_SUITE_P(Pixels, RealSpace,
                         ::testing::Values(Case{std::log(3.0), true, 0.3}, Case{std::log(3.0), true, 1.0},
                                           Case{std::log(3.0), false, 1.0}, Case{std::log(3.0), true, 3.0},
                                           Case{1.0, true, 0.6}),
                         [](const ::testing::TestParamInfo<Case>& info) {
                           const Case& c = info.param;
                           std::string name = "r0_" + std::to_string(static_cast<int>(std::lround(c.r0 * 100))) +
                                              (c.lens ? "_lens" : "_nolens") + "_D" +
                                              std::to_string(static_cast<int>(std::lround(c.d * 10)));
                           return name;
                         });

TEST(RadialCorrelation, VacuumIsZero) {
  const SqueezingSpectrum s = opa_spectrum(0.0, 1.0);
  const RadialCorrelation h(s, 2.0, 64);
  EXPECT_EQ(h(0.7), 0.0);
  EXPECT_THROW(h(5.0), std::out_of_range);
}

}  // namespace
}  // namespace qholo
