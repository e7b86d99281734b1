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
#include <map>
#include <string>
#include <vector>

#include "symce/gradcheck.hpp"

namespace symce {

/// key -> values in file order. Lines are `key = value`; `#` starts a
/// comment; a key given more than once collects every value. Throws
/// ConfigError naming the line on malformed input.
using ConfigEntries = std::map<std::string, std::vector<std::string>>;
ConfigEntries parse_config_entries(const std::string& text);

enum class DatasetKind { Mnist, Blobs };
enum class NoiseKind { None, Symmetric, Pairflip };

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::Mnist;
  std::filesystem::path mnist_dir;  // empty: <default data dir>/mnist
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
  std::size_t blob_classes = 3;
  std::size_t blob_dim = 3;
  std::size_t blob_per_class = 200;
  double blob_separation = 10.0;

  // Sweep grids; `train` requires exactly one value in each.
  std::vector<std::string> losses = {"sl"};
  std::vector<double> alphas = {0.01};
  std::vector<double> betas = {1.0};
  std::vector<double> As = {-4.0};
  std::vector<double> etas = {0.0};
  LossParams params;  // alpha, beta and A are taken from the grids per cell
  NoiseKind noise = NoiseKind::Symmetric;

  std::vector<std::size_t> hidden = {256, 128};
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr = 0.1;
  std::vector<std::size_t> lr_milestones = {10, 30};
  double lr_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  std::size_t repetitions = 1;
  bool cell_outputs = false;
  std::filesystem::path out_dir = "out";

  // verify-theorem
  std::vector<std::size_t> classes = {2, 10};
  std::vector<double> theorem_etas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<double> theorem_As = {-2.0, -4.0, -6.0};
  std::size_t classifiers = 100;
  std::size_t samples = 50;
  std::size_t grid_resolution = 21;
  std::size_t grid_samples = 3;
  std::size_t grid_classes = 3;

  // grad-check
  std::vector<std::string> check_losses = loss_preset_names();
  std::vector<std::size_t> check_classes = {2, 3, 10};
  std::size_t trials = 1000;
  bool saturate = false;
};

/// Applies `entries` over the defaults. Relative paths resolve against
/// `base_dir`. Throws ConfigError on unknown keys, bad values, repeated
/// scalar keys or a missing MNIST directory.
ExperimentConfig config_from_entries(const ConfigEntries& entries,
                                     const std::filesystem::path& base_dir);

ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(DatasetKind kind);
std::string to_string(NoiseKind kind);

}  // namespace symce
