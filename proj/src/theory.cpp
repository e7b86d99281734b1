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

#include "symce/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "symce/errors.hpp"

namespace symce {

namespace {

void check_labels(const FixedClassifier& f, std::span<const std::size_t> labels,
                  const LossSpec& loss, const char* who) {
  if (f.size() != labels.size()) {
    throw InvalidInput(std::string(who) + ": classifier and labels differ in length");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= f.predictions[i].size()) {
      throw InvalidInput(std::string(who) + ": label out of range");
    }
  }
  if (loss.needs_logits()) {
    throw UnsupportedLoss(std::string(who) + ": loss cannot be evaluated from probabilities");
  }
}

double combined_tolerance(double best) { return 1e-12 * std::max(1.0, std::abs(best)); }

}  // namespace

FixedClassifier random_classifier(std::size_t samples, std::size_t classes, RngStream& rng) {
  if (classes < 2) throw InvalidParameter("random_classifier: need at least two classes");
  FixedClassifier f;
  f.predictions.reserve(samples);
  std::vector<double> p(classes);
  for (std::size_t i = 0; i < samples; ++i) {
    double total = 0.0;
    for (double& v : p) {
      v = -std::log1p(-rng.uniform());
      total += v;
    }
    for (double& v : p) v /= total;
    f.predictions.emplace_back(p);
  }
  return f;
}

double empirical_risk(const FixedClassifier& f, std::span<const std::size_t> labels,
                      const LossSpec& loss) {
  check_labels(f, labels, loss, "empirical_risk");
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += evaluate_probs(loss, f.predictions[i], labels[i]);
  }
  return sum / static_cast<double>(labels.size());
}

double expected_noisy_risk(const FixedClassifier& f, std::span<const std::size_t> labels,
                           const LossSpec& loss, const NoiseModel& model) {
  check_labels(f, labels, loss, "expected_noisy_risk");
  if (f.classes() != model.classes()) {
    throw InvalidInput("expected_noisy_risk: noise model class count differs");
  }
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t k = 0; k < model.classes(); ++k) {
      const double w = model(labels[i], k);
      if (w > 0.0) sum += w * evaluate_probs(loss, f.predictions[i], k);
    }
  }
  return sum / static_cast<double>(labels.size());
}

RiskReport verify_symmetric_identity(const FixedClassifier& f,
                                     std::span<const std::size_t> labels, double eta, double A,
                                     std::size_t classes) {
  if (f.classes() != classes) {
    throw InvalidInput("verify_symmetric_identity: classifier class count differs");
  }
  const LossSpec loss = LossSpec::rce(A);
  loss.validate();
  const NoiseModel model = symmetric_matrix(classes, eta);
  const double k = static_cast<double>(classes);
  RiskReport r;
  r.clean_risk = empirical_risk(f, labels, loss);
  r.noisy_risk_analytic = expected_noisy_risk(f, labels, loss, model);
  r.predicted_noisy_risk = (1.0 - eta * k / (k - 1.0)) * r.clean_risk - A * eta;
  r.residual = std::abs(r.noisy_risk_analytic - r.predicted_noisy_risk);
  return r;
}

std::vector<ProbVector> simplex_grid(std::size_t classes, std::size_t resolution) {
  if (classes < 1) throw InvalidParameter("simplex_grid: need at least one class");
  if (resolution < 2) throw InvalidParameter("simplex_grid: resolution must be at least 2");
  const std::size_t steps = resolution - 1;
  std::vector<ProbVector> grid;
  std::vector<std::size_t> counts(classes, 0);
  // Odometer over the first K-1 counts; the last takes the remainder.
  while (true) {
    std::size_t used = 0;
    for (std::size_t c = 0; c + 1 < classes; ++c) used += counts[c];
    if (used <= steps) {
      counts[classes - 1] = steps - used;
      std::vector<double> p(classes);
      for (std::size_t c = 0; c < classes; ++c) {
        p[c] = static_cast<double>(counts[c]) / static_cast<double>(steps);
      }
      grid.emplace_back(std::move(p));
    }
    std::size_t pos = classes - 1;
    while (pos > 0) {
      --pos;
      if (++counts[pos] <= steps) break;
      counts[pos] = 0;
      if (pos == 0) return grid;
    }
    if (classes == 1) return grid;
  }
}

MinimizerSets brute_force_minimizers(std::span<const std::size_t> labels, std::size_t classes,
                                     const LossSpec& loss, const NoiseModel& model,
                                     std::size_t resolution, const MinimizerLimits& limits) {
  const std::size_t n = labels.size();
  if (n == 0) throw InvalidInput("brute_force_minimizers: empty dataset");
  if (n > limits.max_samples || classes > limits.max_classes ||
      resolution > limits.max_resolution) {
    throw ResourceLimit("brute_force_minimizers: instance exceeds " +
                        std::to_string(limits.max_samples) + " samples, " +
                        std::to_string(limits.max_classes) + " classes or resolution " +
                        std::to_string(limits.max_resolution));
  }
  if (model.classes() != classes) {
    throw InvalidInput("brute_force_minimizers: noise model class count differs");
  }
  if (loss.needs_logits()) {
    throw UnsupportedLoss("brute_force_minimizers: loss cannot be evaluated from probabilities");
  }
  for (std::size_t y : labels) {
    if (y >= classes) throw InvalidInput("brute_force_minimizers: label out of range");
  }

  const std::vector<ProbVector> grid = simplex_grid(classes, resolution);
  const std::size_t g = grid.size();
  std::uint64_t tuples = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (tuples > limits.max_tuples / g) {
      throw ResourceLimit("brute_force_minimizers: more than " +
                          std::to_string(limits.max_tuples) + " classifier tuples");
    }
    tuples *= g;
  }

  // Per-sample, per-grid-point clean and noisy losses.
  std::vector<std::vector<double>> clean(n, std::vector<double>(g));
  std::vector<std::vector<double>> noisy(n, std::vector<double>(g));
  for (std::size_t j = 0; j < g; ++j) {
    std::vector<double> by_label(classes);
    for (std::size_t k = 0; k < classes; ++k) by_label[k] = evaluate_probs(loss, grid[j], k);
    for (std::size_t i = 0; i < n; ++i) {
      clean[i][j] = by_label[labels[i]];
      double e = 0.0;
      for (std::size_t k = 0; k < classes; ++k) {
        const double w = model(labels[i], k);
        if (w > 0.0) e += w * by_label[k];
      }
      noisy[i][j] = e;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  auto risk = [&](const std::vector<std::vector<double>>& table, const GridTuple& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += table[i][t[i]];
    return s * inv_n;
  };
  auto for_each_tuple = [&](auto&& visit) {
    GridTuple t(n, 0);
    while (true) {
      visit(t);
      std::size_t pos = n;
      while (pos > 0) {
        --pos;
        if (++t[pos] < g) break;
        t[pos] = 0;
        if (pos == 0) return;
      }
    }
  };

  MinimizerSets out;
  out.tuples = tuples;
  out.clean_min = std::numeric_limits<double>::infinity();
  out.noisy_min = std::numeric_limits<double>::infinity();
  for_each_tuple([&](const GridTuple& t) {
    out.clean_min = std::min(out.clean_min, risk(clean, t));
    out.noisy_min = std::min(out.noisy_min, risk(noisy, t));
  });
  const double clean_cut = out.clean_min + combined_tolerance(out.clean_min);
  const double noisy_cut = out.noisy_min + combined_tolerance(out.noisy_min);
  for_each_tuple([&](const GridTuple& t) {
    if (risk(clean, t) <= clean_cut) out.clean.push_back(t);
    if (risk(noisy, t) <= noisy_cut) out.noisy.push_back(t);
  });
  return out;
}

}  // namespace symce
