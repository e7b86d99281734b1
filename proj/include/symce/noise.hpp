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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symce/numerics.hpp"

namespace symce {

/// Row-stochastic label transition matrix: T(y, k) is the probability that
/// true label y is observed as k.
class NoiseModel {
 public:
  static constexpr double kRowTolerance = 1e-12;

  /// Validates shape, entry range and row sums; throws InvalidParameter.
  NoiseModel(Matrix transition, double eta);

  std::size_t classes() const noexcept { return transition_.rows(); }
  const Matrix& transition() const noexcept { return transition_; }
  double operator()(std::size_t from, std::size_t to) const noexcept {
    return transition_(from, to);
  }
  /// Nominal noise rate the model was built with.
  double eta() const noexcept { return eta_; }

  bool operator==(const NoiseModel&) const = default;

 private:
  Matrix transition_;
  double eta_;
};

using FlipPair = std::pair<std::size_t, std::size_t>;

/// Diagonal 1 - eta, off-diagonal eta / (K - 1).
NoiseModel symmetric_matrix(std::size_t classes, double eta);

/// For each (from, to): T(from, from) = 1 - eta, T(from, to) = eta. Rows not
/// named as a source stay identity rows. a <-> b is two pairs.
NoiseModel pairflip_matrix(std::size_t classes, double eta, std::span<const FlipPair> pairs);

/// 2 -> 7, 3 -> 8, 5 <-> 6, 7 -> 1.
std::vector<FlipPair> mnist_flip_pairs();

/// Picks two distinct members of every group and flips them into each other.
/// Groups with fewer than two members are skipped.
std::vector<FlipPair> sample_group_flip_pairs(const std::vector<std::vector<std::size_t>>& groups,
                                              RngStream& rng);

struct CorruptionRecord {
  std::vector<std::size_t> noisy_labels;
  std::vector<bool> clean_mask;  // true where the label survived
  double realized_rate = 0.0;
};

/// Replaces each label by an inverse-CDF draw (one uniform per label) from
/// its transition row.
CorruptionRecord corrupt(std::span<const std::size_t> labels, const NoiseModel& model,
                         RngStream& rng);

/// True iff every off-diagonal entry is strictly below its row's diagonal.
bool check_asymmetric_condition(const NoiseModel& model);

/// Row-per-line, space-separated decimals that round-trip exactly.
std::string to_text(const NoiseModel& model);
/// Inverse of to_text; `eta` is not part of the block and is supplied.
NoiseModel noise_model_from_text(const std::string& text, double eta);

}  // namespace symce
