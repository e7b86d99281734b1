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
#include <vector>

#include "symce/numerics.hpp"

namespace symce {

struct ClasswiseReport {
  std::vector<double> per_class;     // correct-in-class / support; 1.0 for empty classes
  std::vector<std::size_t> support;
  std::vector<bool> zero_support;    // flags the classes carrying the 1.0 convention
  double overall = 0.0;
  double spread = 0.0;               // max - min of per_class
};

ClasswiseReport classwise_accuracy(std::span<const std::size_t> predictions,
                                   std::span<const std::size_t> labels, std::size_t classes);

struct PredictionDistribution {
  std::vector<std::size_t> predicted;
  std::vector<std::size_t> true_positive;
};

PredictionDistribution prediction_distribution(std::span<const std::size_t> predictions,
                                               std::span<const std::size_t> labels,
                                               std::size_t classes);

/// counts[true][predicted]
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const std::size_t> predictions,
                                                       std::span<const std::size_t> labels,
                                                       std::size_t classes);

/// Mean predicted distribution over the rows whose label is `cls` and whose
/// clean_mask entry is set. Throws EmptySubset when no such row exists.
std::vector<double> clean_subset_confidence(const Matrix& probabilities,
                                            std::span<const std::size_t> labels,
                                            const std::vector<bool>& clean_mask, std::size_t cls);

/// Row-wise argmax.
std::vector<std::size_t> predict_labels(const Matrix& scores);

}  // namespace symce
