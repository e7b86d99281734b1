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

#include "symce/metrics.hpp"

#include <algorithm>
#include <string>

#include "symce/errors.hpp"

namespace symce {

namespace {

void check_pairs(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                 std::size_t classes, const char* who) {
  if (predictions.size() != labels.size()) {
    throw InvalidInput(std::string(who) + ": predictions and labels differ in length");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes || predictions[i] >= classes) {
      throw InvalidInput(std::string(who) + ": class index out of range");
    }
  }
}

}  // namespace

ClasswiseReport classwise_accuracy(std::span<const std::size_t> predictions,
                                   std::span<const std::size_t> labels, std::size_t classes) {
  check_pairs(predictions, labels, classes, "classwise_accuracy");
  ClasswiseReport r;
  r.support.assign(classes, 0);
  std::vector<std::size_t> correct(classes, 0);
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++r.support[labels[i]];
    if (predictions[i] == labels[i]) {
      ++correct[labels[i]];
      ++total_correct;
    }
  }
  r.per_class.resize(classes);
  r.zero_support.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    r.zero_support[c] = r.support[c] == 0;
    r.per_class[c] = r.zero_support[c]
                         ? 1.0
                         : static_cast<double>(correct[c]) / static_cast<double>(r.support[c]);
  }
  r.overall = labels.empty() ? 1.0
                             : static_cast<double>(total_correct) / static_cast<double>(labels.size());
  if (classes > 0) {
    const auto [lo, hi] = std::minmax_element(r.per_class.begin(), r.per_class.end());
    r.spread = *hi - *lo;
  }
  return r;
}

PredictionDistribution prediction_distribution(std::span<const std::size_t> predictions,
                                               std::span<const std::size_t> labels,
                                               std::size_t classes) {
  check_pairs(predictions, labels, classes, "prediction_distribution");
  PredictionDistribution d;
  d.predicted.assign(classes, 0);
  d.true_positive.assign(classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++d.predicted[predictions[i]];
    if (predictions[i] == labels[i]) ++d.true_positive[predictions[i]];
  }
  return d;
}

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const std::size_t> predictions,
                                                       std::span<const std::size_t> labels,
                                                       std::size_t classes) {
  check_pairs(predictions, labels, classes, "confusion_matrix");
  std::vector<std::vector<std::size_t>> m(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) ++m[labels[i]][predictions[i]];
  return m;
}

std::vector<double> clean_subset_confidence(const Matrix& probabilities,
                                            std::span<const std::size_t> labels,
                                            const std::vector<bool>& clean_mask, std::size_t cls) {
  if (probabilities.rows() != labels.size() || clean_mask.size() != labels.size()) {
    throw InvalidInput("clean_subset_confidence: probabilities, labels and mask differ in length");
  }
  std::vector<double> mean(probabilities.cols(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != cls || !clean_mask[i]) continue;
    const auto row = probabilities.row(i);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
    ++n;
  }
  if (n == 0) {
    throw EmptySubset("clean_subset_confidence: no clean samples of class " + std::to_string(cls));
  }
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

std::vector<std::size_t> predict_labels(const Matrix& scores) {
  std::vector<std::size_t> out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) out[i] = argmax(scores.row(i));
  return out;
}

}  // namespace symce
