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
#include <optional>
#include <span>
#include <vector>

#include "symce/data_io.hpp"
#include "symce/losses.hpp"
#include "symce/metrics.hpp"
#include "symce/noise.hpp"
#include "symce/numerics.hpp"

namespace symce {

struct DenseLayer {
  Matrix weights;             // fan_in x fan_out
  std::vector<double> bias;   // fan_out

  bool operator==(const DenseLayer&) const = default;
};

/// Fully connected network: ReLU on hidden layers, identity on the output
/// layer, so forward() yields logits.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t classes() const { return layer_sizes.back(); }

  bool operator==(const MlpModel&) const = default;
};

/// He initialization: weights ~ N(0, 2 / fan_in), zero biases. An empty
/// hidden list (two sizes) gives softmax regression.
MlpModel init_model(std::span<const std::size_t> layer_sizes, RngStream& rng);

/// Layer inputs recorded by forward() for the following backward().
struct ForwardCache {
  std::vector<Matrix> inputs;
  bool valid = false;
};

/// Logits for every row of `batch`. Fills `cache` when given.
Matrix forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

/// Reverse-mode gradients of the batch-mean loss. `grad_logits` holds the
/// per-sample dloss/dlogits rows; the 1/n of the mean is applied here.
/// Throws InvalidState when `cache` was not filled by forward().
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_logits);

struct OptState {
  std::vector<Matrix> weight_velocity;
  std::vector<std::vector<double>> bias_velocity;
  double momentum = 0.9;
  double weight_decay = 0.0;

  static OptState for_model(const MlpModel& model, double momentum, double weight_decay);
};

/// v = momentum * v + g + weight_decay * w;  w -= lr * v.
/// Biases take no weight decay.
void sgd_step(MlpModel& model, const Gradients& grads, OptState& opt, double lr);

struct TrainConfig {
  LossSpec loss;
  std::vector<std::size_t> hidden = {256, 128};
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double base_lr = 0.1;
  std::vector<std::size_t> lr_milestones = {10, 30};
  double lr_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;

  /// Throws InvalidParameter.
  void validate() const;
};

/// base_lr * lr_factor^(number of milestones <= epoch).
double lr_at(std::size_t epoch, const TrainConfig& config);

struct TrainRun {
  TrainConfig config;
  std::vector<double> test_accuracy;                // per epoch
  std::vector<std::vector<double>> class_accuracy;  // per epoch, K entries
  std::vector<double> class_spread;                 // per epoch
  std::vector<double> train_loss;                   // per epoch, mean over noisy labels
  std::vector<std::vector<std::size_t>> confusion;  // final, on the test set
  PredictionDistribution prediction;                // final, on the test set
  /// Final mean confidence profile of the clean training portion of each
  /// class; empty when the class has no clean sample.
  std::vector<std::optional<std::vector<double>>> clean_confidence;
  double realized_noise = 0.0;

  double last_accuracy() const { return test_accuracy.empty() ? 0.0 : test_accuracy.back(); }
  double best_accuracy() const;
  double last_spread() const { return class_spread.empty() ? 0.0 : class_spread.back(); }
};

/// Corrupts the training labels per config.noise (test labels are never
/// touched), then runs the epoch loop and evaluates on the clean test set
/// after every epoch. Throws Divergence on a non-finite loss.
TrainRun train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& config,
               MlpModel* final_model = nullptr);

}  // namespace symce
