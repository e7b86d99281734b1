// Copyright 2026 The symce Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symce/commands.hpp"
#include "symce/config.hpp"
#include "symce/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  // verify-theorem
  std::vector<std::size_t> classes;
  std::vector<double> etas;
  std::vector<double> As;
  std::optional<std::size_t> resolution;
  std::optional<std::size_t> classifiers;

  // grad-check
  std::vector<std::string> losses;
  std::vector<std::size_t> check_classes;
  std::optional<std::size_t> trials;
  bool saturate = false;
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "Experiment config (key = value lines)");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory (overrides the config's out key)");
  cmd->add_option("--seed", f.seed, "Base seed (overrides the config's seed key)");
}

symce::ExperimentConfig resolve(const Flags& f) {
  symce::ExperimentConfig c = f.config.empty() ? symce::ExperimentConfig{}
                                               : symce::load_config(f.config);
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.seed) c.seed = *f.seed;
  if (!f.classes.empty()) c.classes = f.classes;
  if (!f.etas.empty()) c.theorem_etas = f.etas;
  if (!f.As.empty()) c.theorem_As = f.As;
  if (f.resolution) c.grid_resolution = *f.resolution;
  if (f.classifiers) c.classifiers = *f.classifiers;
  if (!f.losses.empty()) c.check_losses = f.losses;
  if (!f.check_classes.empty()) c.check_classes = f.check_classes;
  if (f.trials) c.trials = *f.trials;
  if (f.saturate) c.saturate = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric cross entropy learning lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "symce 1.0");
  Flags f;

  auto* train = app.add_subcommand("train", "Run one training experiment");
  add_common(train, f, true);

  auto* sweep = app.add_subcommand("sweep", "Run the loss/parameter/noise grid");
  add_common(sweep, f, true);
  sweep->add_option("--jobs", f.jobs, "Concurrent training runs")->check(CLI::PositiveNumber);

  auto* theorem = app.add_subcommand("verify-theorem", "Check the noise-tolerance results");
  add_common(theorem, f, false);
  theorem->add_option("--classes", f.classes, "Class counts for the risk identity");
  theorem->add_option("--eta", f.etas, "Symmetric noise rates");
  theorem->add_option("--A", f.As, "Clamp values for log 0");
  theorem->add_option("--resolution", f.resolution, "Simplex grid points per edge");
  theorem->add_option("--classifiers", f.classifiers, "Random classifiers per class count");

  auto* grad = app.add_subcommand("grad-check", "Compare analytic and numeric gradients");
  add_common(grad, f, false);
  grad->add_option("--loss", f.losses, "Loss presets to check");
  grad->add_option("--classes", f.check_classes, "Class counts");
  grad->add_option("--trials", f.trials, "Random trials per loss and class count");
  grad->add_flag("--saturate", f.saturate, "Push one logit per trial up by 30");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : symce::kExitConfig;
  }

  symce::ExperimentConfig config;
  try {
    config = resolve(f);
  } catch (const symce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return symce::kExitConfig;
  }

  if (*train) return symce::cmd_train(config, std::cerr);
  if (*sweep) return symce::cmd_sweep(config, f.jobs, std::cerr);
  if (*theorem) return symce::cmd_verify_theorem(config, std::cerr);
  return symce::cmd_grad_check(config, std::cerr);
}
