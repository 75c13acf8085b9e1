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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "qholo/experiment.hpp"

namespace qholo {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_fig2() {
  ExperimentConfig c;
  c.experiment = "fig2";
  c.d_min = 0.1;
  c.d_max = 10.0;
  c.points = 3;
  return c;
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0 / 3.0 * 1e-7), "6.66666666667e-08");
  EXPECT_EQ(format_number(50.0), "50");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Config, ParsesKeyValueText) {
  const ConfigMap m = parse_config_text("# comment\n r0 = 2.5 \nd-min=0.2 # trailing\n\nlens=false\n");
  EXPECT_EQ(m.at("r0"), "2.5");
  EXPECT_EQ(m.at("d_min"), "0.2");
  EXPECT_EQ(m.at("lens"), "false");
  EXPECT_THROW(parse_config_text("novalue\n"), ConfigError);
}

TEST(Config, AppliesAndValidates) {
  ExperimentConfig c;
  apply_config(c, {{"r0", "2.5"}, {"lens", "off"}, {"grid", "4"}, {"atom_init", "squeezed"}});
  EXPECT_DOUBLE_EQ(c.r0, 2.5);
  EXPECT_FALSE(c.lens);
  EXPECT_EQ(resolved_grid(c), 4);
  ExperimentConfig d;
  EXPECT_THROW(apply_config(d, {{"bogus", "1"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"r0", "abc"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"r0", "1,5"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"d_min", "0"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"atom_init", "thermal"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"atom_var", "0.7"}}), ConfigError);
  EXPECT_THROW(apply_config(d, {{"experiment", "fig9"}}), ConfigError);
}

TEST(Config, DefaultGridDependsOnExperiment) {
  ExperimentConfig c;
  EXPECT_EQ(resolved_grid(c), 8);
  c.experiment = "fig2";
  EXPECT_EQ(resolved_grid(c), 1);
  c.experiment = "channel-mc";
  EXPECT_EQ(resolved_grid(c), 2);
}

TEST(Config, HashTracksResultSettingsOnly) {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.out = "elsewhere.csv";
  b.threads = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.r0 = 1.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Sweep, LogSpacedWithExactEndpoints) {
  ExperimentConfig c;
  c.d_min = 0.05;
  c.d_max = 50.0;
  c.points = 4;
  const auto d = sweep_values(c);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.front(), 0.05);
  EXPECT_EQ(d.back(), 50.0);
  EXPECT_NEAR(d[1] / d[0], d[2] / d[1], 1e-12);
}

TEST(Fig2, DeterministicAndThreadIndependent) {
  ExperimentConfig c = small_fig2();
  const std::string a = to_csv(c, run_fig2(c).table);
  const std::string b = to_csv(c, run_fig2(c).table);
  c.threads = 3;
  const std::string t = to_csv(c, run_fig2(c).table);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t);
  EXPECT_NE(a.find("# config_hash="), std::string::npos);
  EXPECT_NE(a.find("D,cov_lens,cov_no_lens"), std::string::npos);
}

TEST(Fig2, LensOffNeverBelowLensOn) {
  const RunResult r = run_fig2(small_fig2());
  for (const auto& row : r.table.rows) {
    EXPECT_GE(std::get<double>(row[2]), std::get<double>(row[1]));
    EXPECT_TRUE(std::get<bool>(row[5]));
  }
}

TEST(Fig3, ColumnsAndOrdering) {
  ExperimentConfig c;
  c.grid = 3;
  c.d_min = 0.1;
  c.d_max = 10.0;
  c.points = 3;
  const RunResult r = run_fig3(c);
  ASSERT_EQ(r.table.columns[0], "D");
  ASSERT_EQ(r.table.columns[1], "f_av_coherent");
  ASSERT_EQ(r.table.columns[2], "f_av_squeezed");
  ASSERT_EQ(r.table.columns[3], "f_classical_benchmark");
  double prev_c = 0.0;
  for (const auto& row : r.table.rows) {
    const double coh = std::get<double>(row[1]);
    const double sq = std::get<double>(row[2]);
    EXPECT_GT(coh, prev_c);
    EXPECT_GT(sq, coh);
    EXPECT_GT(coh, std::get<double>(row[3]));
    prev_c = coh;
  }
}

TEST(Fig3, PeriodicUsesCirculantPath) {
  ExperimentConfig c;
  c.grid = 4;
  c.periodic = true;
  c.d_min = c.d_max = 1.0;
  c.points = 1;
  const RunResult r = run_fig3(c);
  const PixelGrid g = PixelGrid::square(4, 1.0, true);
  const double dense = fidelity_n(assemble(g, lens_correct(opa_spectrum(std::log(3.0), 1.0)), AtomInit::coherent())).f_av;
  EXPECT_NEAR(std::get<double>(r.table.rows[0][1]), dense, 1e-9);
}

TEST(Limits, SmallPixelCasesPass) {
  ExperimentConfig c;
  c.experiment = "limits";
  const RunResult r = run_limits(c);
  ASSERT_EQ(r.table.rows.size(), limit_cases().size());
  EXPECT_TRUE(std::get<bool>(r.table.rows[0][7]));
  EXPECT_TRUE(std::get<bool>(r.table.rows[3][7]));
}

TEST(Verify, PassesAndInjectionFails) {
  ExperimentConfig c;
  c.experiment = "verify";
  c.mc_samples = 20000;
  const RunResult ok = run_verify(c);
  EXPECT_EQ(ok.exit_code, 0);
  c.inject_nonsymplectic = true;
  const RunResult bad = run_verify(c);
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(bad.summary["failed_checks"], 1);
}

TEST(ChannelMc, PassesForSqueezedAtoms) {
  ExperimentConfig c;
  c.experiment = "channel-mc";
  c.atom_init = "squeezed";
  c.mc_samples = 50000;
  c.d_min = 0.5;
  const RunResult r = run_channel_mc(c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.table.rows.size(), 2u * 4u * 4u);
}

TEST(Output, WritesCsvAndJsonSidecar) {
  ExperimentConfig c = small_fig2();
  c.out = ::testing::TempDir() + "qholo_out.csv";
  const RunResult r = run_fig2(c);
  const auto [csv, meta] = write_outputs(c, r);
  EXPECT_EQ(meta, ::testing::TempDir() + "qholo_out.json");
  const auto j = nlohmann::json::parse(slurp(meta));
  EXPECT_EQ(j["config_hash"], config_hash(c));
  EXPECT_EQ(j["rows"], 3);
  EXPECT_EQ(j["csv"], "qholo_out.csv");
  EXPECT_EQ(metadata_path("a/b.c/run"), "a/b.c/run.json");
}

#ifdef QHOLO_CLI_PATH
int run_cli(const std::string& args) {
  const int status = std::system((std::string(QHOLO_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ConfigFileWithOverridesIsByteIdentical) {
  const std::string dir = ::testing::TempDir();
  {
    std::ofstream cfg(dir + "qholo_cli.cfg");
    cfg << "d_min = 0.1\nd_max = 5\npoints = 2\ngrid = 2\nr0 = 0.5\n";
  }
  const std::string common = "fig3 --config " + dir + "qholo_cli.cfg --r0 1.0986122886681098 ";
  ASSERT_EQ(run_cli(common + "--out " + dir + "cli_a.csv"), 0);
  ASSERT_EQ(run_cli(common + "--out " + dir + "cli_b.csv"), 0);
  const std::string a = slurp(dir + "cli_a.csv");
  EXPECT_EQ(a, slurp(dir + "cli_b.csv"));
  EXPECT_NE(a.find("# r0=1.09861228867"), std::string::npos);  // flag beat the file
  EXPECT_NE(a.find("# grid=2"), std::string::npos);
  // JSON sidecars differ only in the csv name.
  auto ja = nlohmann::json::parse(slurp(dir + "cli_a.json"));
  auto jb = nlohmann::json::parse(slurp(dir + "cli_b.json"));
  ja.erase("csv");
  jb.erase("csv");
  EXPECT_EQ(ja, jb);
}

TEST(Cli, ExitCodes) {
  const std::string dir = ::testing::TempDir();
  EXPECT_EQ(run_cli("verify --mc-samples 5000 --out " + dir + "v.csv"), 0);
  EXPECT_EQ(run_cli("verify --mc-samples 5000 --inject-nonsymplectic --out " + dir + "v.csv"), 1);
  EXPECT_EQ(run_cli("fig2 --d-min -1 --out " + dir + "x.csv"), 2);
  EXPECT_EQ(run_cli("fig2 --config /nonexistent.cfg"), 2);
  EXPECT_NE(run_cli("nosuchcommand"), 0);
}
#endif

}  // namespace
}  // namespace qholo
