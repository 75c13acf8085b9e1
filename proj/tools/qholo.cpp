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

// qholo: run the memory experiments and write CSV + JSON results.
//
//   qholo fig3 --grid 8 --d-min 0.05 --d-max 50 --points 60 --out fig3.csv
//   qholo verify --config run.cfg

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qholo/experiment.hpp"

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> options;
};

// Shared storage: only one subcommand parses per run.
struct Flags {
  std::map<std::string, std::string> values;
  bool lens = true;
  bool periodic = false;
  bool inject = false;
  std::string config;
};

Subcommand add_subcommand(CLI::App& app, const std::string& name, const std::string& help, Flags& f) {
  Subcommand s;
  s.app = app.add_subcommand(name, help);
  auto opt = [&](const std::string& flag, const std::string& key, const std::string& desc) {
    return s.options[key] = s.app->add_option(flag, f.values[key], desc);
  };
  opt("--r0", "r0", "amplifier gain r0 (default ln 3)");
  opt("--psi0", "psi0", "squeezing angle at q = 0 (default pi/2)");
  opt("--d-min", "d_min", "smallest pixel side, units of l_d");
  opt("--d-max", "d_max", "largest pixel side, units of l_d");
  opt("--points", "points", "log-spaced sweep points");
  opt("--grid", "grid", "pixels per side");
  opt("--atom-init", "atom_init", "coherent | squeezed")->check(CLI::IsMember({"coherent", "squeezed"}));
  opt("--atom-var", "atom_var", "X variance of squeezed atoms");
  opt("--mc-samples", "mc_samples", "Monte-Carlo draws");
  opt("--seed", "seed", "RNG seed");
  opt("--l-d", "l_d", "coherence length");
  opt("--rel-tol", "rel_tol", "quadrature tolerance");
  opt("--density-nal", "density_nal", "n_a * l * lambda; enables the density term");
  opt("--threads", "threads", "worker threads for sweeps");
  opt("--out", "out", "CSV path; JSON metadata goes next to it");
  s.options["lens"] = s.app->add_flag("--lens,!--no-lens", f.lens, "thin-lens orientation correction");
  s.options["periodic"] = s.app->add_flag("--periodic", f.periodic, "periodic pixel grid");
  if (name == "verify") {
    s.options["inject_nonsymplectic"] =
        s.app->add_flag("--inject-nonsymplectic", f.inject, "add a failing map (tests the failure path)");
  }
  s.app->add_option("--config", f.config, "key=value file; command-line flags win");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holographic quantum memory: noise and fidelity calculations"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<Subcommand> subs;
  subs.push_back(add_subcommand(app, "fig2", "pixel covariance vs pixel size, with and without lens", flags));
  subs.push_back(add_subcommand(app, "fig3", "average fidelity vs pixel size", flags));
  subs.push_back(add_subcommand(app, "limits", "small/large pixel limits of the fidelity", flags));
  subs.push_back(add_subcommand(app, "verify", "internal consistency checks", flags));
  subs.push_back(add_subcommand(app, "channel-mc", "Monte-Carlo check of the memory channel", flags));
  CLI11_PARSE(app, argc, argv);

  const Subcommand* chosen = nullptr;
  for (const auto& s : subs) {
    if (s.app->parsed()) chosen = &s;
  }

  qholo::ExperimentConfig cfg;
  try {
    qholo::ConfigMap values;
    if (!flags.config.empty()) values = qholo::load_config_file(flags.config);
    for (const auto& [key, option] : chosen->options) {
      if (option->count() == 0) continue;
      if (key == "lens") values[key] = flags.lens ? "true" : "false";
      else if (key == "periodic") values[key] = flags.periodic ? "true" : "false";
      else if (key == "inject_nonsymplectic") values[key] = flags.inject ? "true" : "false";
      else values[key] = flags.values[key];
    }
    values["experiment"] = chosen->app->get_name();
    qholo::apply_config(cfg, values);
  } catch (const qholo::ConfigError& e) {
    std::cerr << "qholo: " << e.what() << '\n';
    return 2;
  }

  try {
    const qholo::RunResult result = qholo::run_experiment(cfg);
    const auto [csv, meta] = qholo::write_outputs(cfg, result);
    if (cfg.experiment == "verify" || cfg.experiment == "limits") {
      std::cout << qholo::to_csv(cfg, result.table);
    }
    std::cout << "wrote " << csv << " and " << meta << '\n';
    if (!result.summary.empty()) std::cout << result.summary.dump() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "qholo: " << e.what() << '\n';
    return 3;
  }
}
