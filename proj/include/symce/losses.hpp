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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symce/noise.hpp"
#include "symce/numerics.hpp"

namespace symce {

/// A label distribution q(k|x): one-hot, smoothed or bootstrap-mixed.
class TargetDist {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validates entries in [0, 1] summing to 1; throws InvalidInput.
  explicit TargetDist(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t k) const noexcept { return weights_[k]; }
  std::span<const double> values() const noexcept { return weights_; }

  bool operator==(const TargetDist&) const = default;

 private:
  std::vector<double> weights_;
};

enum class LossKind { CE, RCE, SL, MAE, GCE, Forward, Composite };
enum class BootstrapMode { None, Soft, Hard };

std::string_view to_string(LossKind kind);
std::string_view to_string(BootstrapMode mode);
/// Accepts the lower-case names produced by to_string.
LossKind parse_loss_kind(std::string_view name);
BootstrapMode parse_bootstrap_mode(std::string_view name);

struct CompositeTerms;

/// Tagged description of one loss. Parameters irrelevant to `kind` are
/// ignored but still range-checked by validate().
///
/// Target transforms (smoothing_eps, bootstrap_mode) apply to the kinds that
/// consume a full target distribution: CE, RCE, SL and MAE. Smoothing is
/// applied first, then bootstrap mixing. GCE and Forward read the raw label.
struct LossSpec {
  LossKind kind = LossKind::CE;
  double alpha = 1.0;
  double beta = 1.0;
  double A = -4.0;
  double gce_exponent = 0.7;
  double smoothing_eps = 0.0;
  double bootstrap_weight = 1.0;
  BootstrapMode bootstrap_mode = BootstrapMode::None;
  std::shared_ptr<const NoiseModel> transition;
  std::shared_ptr<const CompositeTerms> composite;

  static LossSpec ce();
  static LossSpec rce(double A);
  static LossSpec sl(double alpha, double beta, double A);
  static LossSpec mae();
  static LossSpec gce(double exponent);
  static LossSpec lsr(double eps);
  static LossSpec bootstrap(BootstrapMode mode, double weight);
  static LossSpec forward(NoiseModel transition);
  static LossSpec combine(LossSpec first, double first_weight, LossSpec second,
                          double second_weight);

  /// Throws InvalidParameter on any out-of-range field.
  void validate() const;
  /// True if the loss (or any child) is Forward, i.e. cannot be evaluated
  /// from probabilities alone.
  bool needs_logits() const;
};

struct CompositeTerms {
  LossSpec first;
  double first_weight = 1.0;
  LossSpec second;
  double second_weight = 1.0;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad_logits;
};

TargetDist one_hot(std::size_t label, std::size_t classes);

/// (1 - eps) + eps/K at the label, eps/K elsewhere.
TargetDist smoothed_target(std::size_t label, double eps, std::size_t classes);

/// soft: w * onehot(label) + (1 - w) * prediction
/// hard: w * onehot(label) + (1 - w) * onehot(argmax prediction)
/// None returns the one-hot label.
TargetDist bootstrap_target(std::size_t label, const ProbVector& prediction, double weight,
                            BootstrapMode mode);

/// -sum q_k ln p_k; gradient p - q.
LossResult ce_loss(std::span<const double> logits, const TargetDist& target);

/// -sum p_k clamped_log(q_k, A). For one-hot targets this is -A (1 - p_y).
LossResult rce_loss(std::span<const double> logits, const TargetDist& target, double A);

/// alpha * CE + beta * RCE.
LossResult sl_loss(std::span<const double> logits, const TargetDist& target, double alpha,
                   double beta, double A);

/// sum |p_k - q_k|; the gradient uses sign(0) = 0 at kinks.
LossResult mae_loss(std::span<const double> logits, const TargetDist& target);

/// (1 - p_y^q) / q, evaluated as -expm1(q ln p_y) / q so small q stays
/// accurate.
LossResult gce_loss(std::span<const double> logits, std::size_t label, double exponent);

/// -ln((T^T p)_label). Values of (T^T p)_label below machine epsilon are
/// clamped there, with zero gradient.
LossResult forward_loss(std::span<const double> logits, std::size_t label, const NoiseModel& t);

/// What a loss needs besides logits: the observed label and, for bootstrap
/// targets, the prediction mixed into the target. The prediction is treated
/// as a constant; when absent, softmax(logits) is used.
struct LabelContext {
  std::size_t label = 0;
  const ProbVector* prediction = nullptr;
};

/// Target distribution the LossSpec transforms produce for `label`.
TargetDist resolve_target(const LossSpec& spec, std::size_t label, const ProbVector& prediction);

LossResult composite_loss(const LossSpec& first, double first_weight, const LossSpec& second,
                          double second_weight, std::span<const double> logits,
                          const LabelContext& ctx);

/// Dispatches on spec.kind. Does not call validate().
LossResult evaluate(const LossSpec& spec, std::span<const double> logits, const LabelContext& ctx);

/// Loss value from a probability vector alone. +inf where CE-type terms hit
/// p_k = 0 with q_k > 0. Throws UnsupportedLoss for Forward.
double evaluate_probs(const LossSpec& spec, const ProbVector& p, std::size_t label);

}  // namespace symce
