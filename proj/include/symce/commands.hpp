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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symce/config.hpp"
#include "symce/data_io.hpp"
#include "symce/noise.hpp"
#include "symce/trainer.hpp"

namespace symce {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitResourceLimit = 4,
};

inline constexpr int kRunSchemaVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;

/// Train/test data named by the config. Blob data is drawn from the base
/// seed, so every repetition of a sweep sees the same sample.
std::pair<Dataset, Dataset> load_experiment_data(const ExperimentConfig& config);

/// Symmetric or pair-flip model for `classes`; nullopt for NoiseKind::None.
/// Pair flips use the MNIST list for 10 classes and c -> c+1 (mod K)
/// otherwise.
std::optional<NoiseModel> make_noise_model(NoiseKind kind, double eta, std::size_t classes);

/// One cell of the experiment grid.
struct Cell {
  std::string loss;
  double alpha = 0.0;
  double beta = 0.0;
  double A = 0.0;
  double eta = 0.0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
};

/// loss x alpha x beta x A x eta x repetition, in that nesting order.
std::vector<Cell> expand_grid(const ExperimentConfig& config);

/// Forward presets use the run's own noise model (identity when clean).
TrainConfig make_train_config(const ExperimentConfig& config, const Cell& cell,
                              std::size_t classes);

std::string run_json(const ExperimentConfig& config, const Cell& cell, const TrainRun& run);
/// epoch,overall_acc,acc_class_0..acc_class_{K-1}
std::string epochs_csv(const TrainRun& run, std::size_t classes);
/// section,row,col,value
std::string final_report_csv(const TrainRun& run);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// Each command writes into config.out_dir and returns an ExitCode.
int cmd_train(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::size_t jobs, std::ostream& log);
int cmd_verify_theorem(const ExperimentConfig& config, std::ostream& log);
int cmd_grad_check(const ExperimentConfig& config, std::ostream& log);

}  // namespace symce
