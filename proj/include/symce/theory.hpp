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
#include <span>
#include <vector>

#include "symce/losses.hpp"
#include "symce/noise.hpp"
#include "symce/numerics.hpp"

namespace symce {

/// A classifier evaluated on a finite dataset: one prediction per sample.
struct FixedClassifier {
  std::vector<ProbVector> predictions;

  std::size_t size() const noexcept { return predictions.size(); }
  std::size_t classes() const noexcept {
    return predictions.empty() ? 0 : predictions.front().size();
  }
};

/// Each prediction drawn uniformly from the K-simplex (Dirichlet(1, ..., 1)).
FixedClassifier random_classifier(std::size_t samples, std::size_t classes, RngStream& rng);

/// Mean loss of f under `labels`. Throws UnsupportedLoss for losses that need
/// logits (Forward) and InvalidInput on size mismatches.
double empirical_risk(const FixedClassifier& f, std::span<const std::size_t> labels,
                      const LossSpec& loss);

/// (1/n) sum_i sum_k T(y_i, k) loss(f(x_i), k): the exact expectation over
/// label noise.
double expected_noisy_risk(const FixedClassifier& f, std::span<const std::size_t> labels,
                           const LossSpec& loss, const NoiseModel& model);

struct RiskReport {
  double clean_risk = 0.0;
  double noisy_risk_analytic = 0.0;
  double predicted_noisy_risk = 0.0;
  double residual = 0.0;
};

/// Compares the RCE noisy risk under symmetric noise with
/// (1 - eta K/(K-1)) R(f) - A eta.
RiskReport verify_symmetric_identity(const FixedClassifier& f,
                                     std::span<const std::size_t> labels, double eta, double A,
                                     std::size_t classes);

/// All points of the K-simplex whose coordinates are multiples of
/// 1/(resolution - 1), in lexicographic order of the integer counts.
std::vector<ProbVector> simplex_grid(std::size_t classes, std::size_t resolution);

struct MinimizerLimits {
  std::size_t max_samples = 4;
  std::size_t max_classes = 3;
  std::size_t max_resolution = 21;
  std::uint64_t max_tuples = 20'000'000;
};

/// A classifier on the grid, encoded as one grid index per sample.
using GridTuple = std::vector<std::size_t>;

struct MinimizerSets {
  std::vector<GridTuple> clean;  // argmin of the clean empirical risk
  std::vector<GridTuple> noisy;  // argmin of the expected noisy risk
  double clean_min = 0.0;
  double noisy_min = 0.0;
  std::uint64_t tuples = 0;

  bool equal() const { return clean == noisy; }
};

/// Enumerates every assignment of a grid point to each sample and returns
/// both argmin sets (sorted; ties within 1e-12 relative grouped). Throws
/// ResourceLimit when the instance exceeds `limits`.
MinimizerSets brute_force_minimizers(std::span<const std::size_t> labels, std::size_t classes,
                                     const LossSpec& loss, const NoiseModel& model,
                                     std::size_t resolution, const MinimizerLimits& limits = {});

}  // namespace symce
