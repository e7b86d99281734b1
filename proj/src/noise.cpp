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

#include "symce/noise.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "symce/errors.hpp"

namespace symce {

namespace {

void require_rate(double eta, const char* who) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw InvalidParameter(std::string(who) + ": eta must lie in [0, 1]");
  }
}

}  // namespace

NoiseModel::NoiseModel(Matrix transition, double eta)
    : transition_(std::move(transition)), eta_(eta) {
  const std::size_t k = transition_.rows();
  if (k == 0 || transition_.cols() != k) throw InvalidParameter("NoiseModel: T must be square");
  require_rate(eta, "NoiseModel");
  for (std::size_t r = 0; r < k; ++r) {
    double sum = 0.0;
    for (double v : transition_.row(r)) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter("NoiseModel: entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      throw InvalidParameter("NoiseModel: row " + std::to_string(r) + " sums to " +
                             std::to_string(sum));
    }
  }
}

NoiseModel symmetric_matrix(std::size_t classes, double eta) {
  if (classes < 2) throw InvalidParameter("symmetric_matrix: need at least two classes");
  require_rate(eta, "symmetric_matrix");
  const double off = eta / static_cast<double>(classes - 1);
  Matrix t(classes, classes, off);
  for (std::size_t i = 0; i < classes; ++i) t(i, i) = 1.0 - eta;
  return NoiseModel(std::move(t), eta);
}

NoiseModel pairflip_matrix(std::size_t classes, double eta, std::span<const FlipPair> pairs) {
  require_rate(eta, "pairflip_matrix");
  Matrix t = Matrix::identity(classes);
  std::set<std::size_t> seen;
  for (const auto& [from, to] : pairs) {
    if (from >= classes || to >= classes) {
      throw InvalidParameter("pairflip_matrix: class index out of range");
    }
    if (from == to) throw InvalidParameter("pairflip_matrix: self flip");
    if (!seen.insert(from).second) {
      throw InvalidParameter("pairflip_matrix: duplicate source class " + std::to_string(from));
    }
    t(from, from) = 1.0 - eta;
    t(from, to) = eta;
  }
  return NoiseModel(std::move(t), eta);
}

std::vector<FlipPair> mnist_flip_pairs() { return {{2, 7}, {3, 8}, {5, 6}, {6, 5}, {7, 1}}; }

std::vector<FlipPair> sample_group_flip_pairs(const std::vector<std::vector<std::size_t>>& groups,
                                              RngStream& rng) {
  std::vector<FlipPair> pairs;
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    const std::size_t a = rng.uniform_index(group.size());
    std::size_t b = rng.uniform_index(group.size() - 1);
    if (b >= a) ++b;
    pairs.emplace_back(group[a], group[b]);
    pairs.emplace_back(group[b], group[a]);
  }
  return pairs;
}

CorruptionRecord corrupt(std::span<const std::size_t> labels, const NoiseModel& model,
                         RngStream& rng) {
  const std::size_t k = model.classes();
  CorruptionRecord rec;
  rec.noisy_labels.reserve(labels.size());
  rec.clean_mask.reserve(labels.size());
  std::size_t flipped = 0;
  for (std::size_t y : labels) {
    if (y >= k) throw InvalidInput("corrupt: label " + std::to_string(y) + " out of range");
    const double u = rng.uniform();
    // Inverse CDF; falls back to the last positive entry if rounding leaves
    // the cumulative sum a hair below u.
    std::size_t drawn = y;
    double cumulative = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = model(y, j);
      if (w <= 0.0) continue;
      drawn = j;
      cumulative += w;
      if (u < cumulative) break;
    }
    rec.noisy_labels.push_back(drawn);
    rec.clean_mask.push_back(drawn == y);
    if (drawn != y) ++flipped;
  }
  rec.realized_rate =
      labels.empty() ? 0.0 : static_cast<double>(flipped) / static_cast<double>(labels.size());
  return rec;
}

bool check_asymmetric_condition(const NoiseModel& model) {
  const std::size_t k = model.classes();
  for (std::size_t y = 0; y < k; ++y) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j != y && !(model(y, j) < model(y, y))) return false;
    }
  }
  return true;
}

std::string to_text(const NoiseModel& model) {
  std::string out;
  char buf[40];
  const std::size_t k = model.classes();
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", model(r, c));
      if (c) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

NoiseModel noise_model_from_text(const std::string& text, double eta) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InvalidInput("noise_model_from_text: bad number '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return NoiseModel(Matrix::from_rows(rows), eta);
}

}  // namespace symce
