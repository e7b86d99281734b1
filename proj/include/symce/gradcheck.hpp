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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "symce/losses.hpp"
#include "symce/numerics.hpp"

namespace symce {

/// Parameters shared by the named loss presets.
struct LossParams {
  double alpha = 0.01;
  double beta = 1.0;
  double A = -4.0;
  double gce_exponent = 0.7;
  double lsr_eps = 0.1;
  double bootstrap_soft_weight = 0.95;
  double bootstrap_hard_weight = 0.8;
};

/// ce, rce, sl, mae, gce, forward, lsr, bootstrap_soft, bootstrap_hard,
/// forward_sl (Forward plus beta * RCE) and lsr_sl (SL on smoothed targets).
const std::vector<std::string>& loss_preset_names();

/// Builds a preset. `transition` is required by the Forward presets and
/// ignored otherwise. Throws InvalidParameter on an unknown name.
LossSpec make_loss_preset(const std::string& name, const LossParams& params,
                          const NoiseModel* transition);

/// max_j |a_j - n_j| / max(|a|_inf, |n|_inf, 1e-6); +inf when any entry is not finite.
double gradient_relative_error(std::span<const double> analytic, std::span<const double> numeric);

/// Central differences of f at z with step h.
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> z, double h);

struct GradCheckOptions {
  std::vector<std::string> losses = loss_preset_names();
  std::vector<std::size_t> classes = {2, 3, 10};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double step = 1e-5;
  double tolerance = 1e-6;
  /// Adds +30 to one random logit per trial.
  bool saturate = false;
  LossParams params;
};

struct GradCheckRow {
  std::string loss;
  std::size_t classes = 0;
  std::size_t trials = 0;
  double max_rel_err = 0.0;
  bool passed = false;
};

/// Random logits per trial. Losses that consume a target distribution (ce,
/// rce, sl, mae) draw a random target, one-hot on every other trial; the
/// rest use a random label, and Forward presets a random row-stochastic T.
/// Bootstrap predictions are held fixed while differencing.
std::vector<GradCheckRow> run_grad_check(const GradCheckOptions& options);

}  // namespace symce
