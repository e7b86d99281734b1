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

#include "symce/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "symce/errors.hpp"

namespace symce {

namespace {

void require_dims(std::span<const double> logits, std::size_t k, const char* who) {
  if (logits.size() != k) {
    throw InvalidInput(std::string(who) + ": logits have " + std::to_string(logits.size()) +
                       " entries, target has " + std::to_string(k));
  }
}

void require_label(std::size_t label, std::size_t k, const char* who) {
  if (label >= k) throw InvalidInput(std::string(who) + ": label out of range");
}

void require_negative_floor(double a, const char* who) {
  if (!(a < 0.0) || !std::isfinite(a)) {
    throw InvalidParameter(std::string(who) + ": A must be a finite negative number");
  }
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

/// Chain rule through softmax: dL/dz_j = p_j (g_j - sum_k g_k p_k) where g
/// is dL/dp.
std::vector<double> softmax_backward(const ProbVector& p, std::span<const double> dloss_dp) {
  double mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mean += dloss_dp[k] * p[k];
  std::vector<double> grad(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) grad[j] = p[j] * (dloss_dp[j] - mean);
  return grad;
}

double complement(const ProbVector& p, std::size_t k) {
  double rest = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != k) rest += p[j];
  }
  return rest;
}

LossResult weighted_sum(const LossResult& a, double wa, const LossResult& b, double wb) {
  LossResult out;
  out.value = wa * a.value + wb * b.value;
  out.grad_logits.resize(a.grad_logits.size());
  for (std::size_t j = 0; j < out.grad_logits.size(); ++j) {
    out.grad_logits[j] = wa * a.grad_logits[j] + wb * b.grad_logits[j];
  }
  return out;
}

bool uses_target(LossKind kind) {
  return kind == LossKind::CE || kind == LossKind::RCE || kind == LossKind::SL ||
         kind == LossKind::MAE;
}

}  // namespace

TargetDist::TargetDist(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidInput("TargetDist: empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!in_unit(w)) throw InvalidInput("TargetDist: entry outside [0, 1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidInput("TargetDist: weights sum to " + std::to_string(sum));
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::CE: return "ce";
    case LossKind::RCE: return "rce";
    case LossKind::SL: return "sl";
    case LossKind::MAE: return "mae";
    case LossKind::GCE: return "gce";
    case LossKind::Forward: return "forward";
    case LossKind::Composite: return "composite";
  }
  return "?";
}

std::string_view to_string(BootstrapMode mode) {
  switch (mode) {
    case BootstrapMode::None: return "none";
    case BootstrapMode::Soft: return "soft";
    case BootstrapMode::Hard: return "hard";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  for (auto kind : {LossKind::CE, LossKind::RCE, LossKind::SL, LossKind::MAE, LossKind::GCE,
                    LossKind::Forward, LossKind::Composite}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidParameter("unknown loss kind '" + std::string(name) + "'");
}

BootstrapMode parse_bootstrap_mode(std::string_view name) {
  for (auto mode : {BootstrapMode::None, BootstrapMode::Soft, BootstrapMode::Hard}) {
    if (to_string(mode) == name) return mode;
  }
  throw InvalidParameter("unknown bootstrap mode '" + std::string(name) + "'");
}

LossSpec LossSpec::ce() { return LossSpec{}; }

LossSpec LossSpec::rce(double A) {
  LossSpec s;
  s.kind = LossKind::RCE;
  s.A = A;
  return s;
}

LossSpec LossSpec::sl(double alpha, double beta, double A) {
  LossSpec s;
  s.kind = LossKind::SL;
  s.alpha = alpha;
  s.beta = beta;
  s.A = A;
  return s;
}

LossSpec LossSpec::mae() {
  LossSpec s;
  s.kind = LossKind::MAE;
  return s;
}

LossSpec LossSpec::gce(double exponent) {
  LossSpec s;
  s.kind = LossKind::GCE;
  s.gce_exponent = exponent;
  return s;
}

LossSpec LossSpec::lsr(double eps) {
  LossSpec s;
  s.smoothing_eps = eps;
  return s;
}

LossSpec LossSpec::bootstrap(BootstrapMode mode, double weight) {
  LossSpec s;
  s.bootstrap_mode = mode;
  s.bootstrap_weight = weight;
  return s;
}

LossSpec LossSpec::forward(NoiseModel transition) {
  LossSpec s;
  s.kind = LossKind::Forward;
  s.transition = std::make_shared<const NoiseModel>(std::move(transition));
  return s;
}

LossSpec LossSpec::combine(LossSpec first, double first_weight, LossSpec second,
                           double second_weight) {
  LossSpec s;
  s.kind = LossKind::Composite;
  s.composite = std::make_shared<const CompositeTerms>(
      CompositeTerms{std::move(first), first_weight, std::move(second), second_weight});
  return s;
}

void LossSpec::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidParameter("LossSpec: " + msg); };
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
  if (!(A < 0.0) || !std::isfinite(A)) fail("A must be finite and < 0");
  if (!(gce_exponent > 0.0 && gce_exponent <= 1.0)) fail("gce exponent must lie in (0, 1]");
  if (!in_unit(smoothing_eps)) fail("smoothing eps must lie in [0, 1]");
  if (!in_unit(bootstrap_weight)) fail("bootstrap weight must lie in [0, 1]");
  if (kind == LossKind::Forward && !transition) fail("forward loss needs a transition matrix");
  if (kind == LossKind::Composite) {
    if (!composite) fail("composite loss needs two terms");
    for (double w : {composite->first_weight, composite->second_weight}) {
      if (!(w >= 0.0) || !std::isfinite(w)) fail("composite weights must be finite and >= 0");
    }
    composite->first.validate();
    composite->second.validate();
  }
}

bool LossSpec::needs_logits() const {
  if (kind == LossKind::Forward) return true;
  if (kind == LossKind::Composite && composite) {
    return composite->first.needs_logits() || composite->second.needs_logits();
  }
  return false;
}

TargetDist one_hot(std::size_t label, std::size_t classes) {
  require_label(label, classes, "one_hot");
  std::vector<double> q(classes, 0.0);
  q[label] = 1.0;
  return TargetDist(std::move(q));
}

TargetDist smoothed_target(std::size_t label, double eps, std::size_t classes) {
  if (!in_unit(eps)) throw InvalidParameter("smoothed_target: eps must lie in [0, 1]");
  require_label(label, classes, "smoothed_target");
  const double share = eps / static_cast<double>(classes);
  std::vector<double> q(classes, share);
  q[label] = std::min(1.0, (1.0 - eps) + share);
  return TargetDist(std::move(q));
}

namespace {

TargetDist mix_bootstrap(const std::vector<double>& base, const ProbVector& prediction,
                         double weight, BootstrapMode mode) {
  if (!in_unit(weight)) throw InvalidParameter("bootstrap_target: weight must lie in [0, 1]");
  if (prediction.size() != base.size()) {
    throw InvalidInput("bootstrap_target: prediction size does not match class count");
  }
  if (mode == BootstrapMode::None) return TargetDist(base);
  std::vector<double> q(base.size());
  if (mode == BootstrapMode::Soft) {
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = weight * base[k] + (1.0 - weight) * prediction[k];
    }
  } else {
    const std::size_t top = argmax(prediction.values());
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = weight * base[k] + (k == top ? 1.0 - weight : 0.0);
    }
  }
  for (double& v : q) v = std::clamp(v, 0.0, 1.0);
  return TargetDist(std::move(q));
}

}  // namespace

TargetDist bootstrap_target(std::size_t label, const ProbVector& prediction, double weight,
                            BootstrapMode mode) {
  std::vector<double> base(prediction.size(), 0.0);
  require_label(label, base.size(), "bootstrap_target");
  base[label] = 1.0;
  return mix_bootstrap(base, prediction, weight, mode);
}

TargetDist resolve_target(const LossSpec& spec, std::size_t label, const ProbVector& prediction) {
  const std::size_t k = prediction.size();
  TargetDist base = spec.smoothing_eps > 0.0 ? smoothed_target(label, spec.smoothing_eps, k)
                                             : one_hot(label, k);
  if (spec.bootstrap_mode == BootstrapMode::None) return base;
  return mix_bootstrap({base.values().begin(), base.values().end()}, prediction,
                       spec.bootstrap_weight, spec.bootstrap_mode);
}

LossResult ce_loss(std::span<const double> logits, const TargetDist& target) {
  require_dims(logits, target.size(), "ce_loss");
  const std::vector<double> log_p = log_softmax(logits);
  const ProbVector p = softmax(logits);
  LossResult r;
  r.grad_logits.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (target[k] > 0.0) r.value -= target[k] * log_p[k];
    r.grad_logits[k] = p[k] - target[k];
  }
  return r;
}

LossResult rce_loss(std::span<const double> logits, const TargetDist& target, double A) {
  require_negative_floor(A, "rce_loss");
  require_dims(logits, target.size(), "rce_loss");
  const ProbVector p = softmax(logits);
  std::vector<double> log_q(target.size());
  double expected = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    log_q[k] = clamped_log(target[k], A);
    expected += p[k] * log_q[k];
  }
  LossResult r;
  r.value = -expected;
  r.grad_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    r.grad_logits[j] = -p[j] * (log_q[j] - expected);
  }
  return r;
}

LossResult sl_loss(std::span<const double> logits, const TargetDist& target, double alpha,
                   double beta, double A) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw InvalidParameter("sl_loss: alpha and beta must be >= 0");
  }
  return weighted_sum(ce_loss(logits, target), alpha, rce_loss(logits, target, A), beta);
}

LossResult mae_loss(std::span<const double> logits, const TargetDist& target) {
  require_dims(logits, target.size(), "mae_loss");
  const ProbVector p = softmax(logits);
  std::vector<double> sign(p.size());
  LossResult r;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - target[k];
    // 1 - p_k as the sum of the other entries keeps saturated logits exact.
    r.value += target[k] == 1.0 ? complement(p, k) : std::abs(d);
    sign[k] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  r.grad_logits = softmax_backward(p, sign);
  return r;
}

LossResult gce_loss(std::span<const double> logits, std::size_t label, double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0)) {
    throw InvalidParameter("gce_loss: exponent must lie in (0, 1]");
  }
  require_label(label, logits.size(), "gce_loss");
  const ProbVector p = softmax(logits);
  const double log_py = log_softmax(logits)[label];
  const double py_q = std::exp(exponent * log_py);
  LossResult r;
  r.value = -std::expm1(exponent * log_py) / exponent;
  r.grad_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    r.grad_logits[j] = -py_q * ((j == label ? 1.0 : 0.0) - p[j]);
  }
  return r;
}

LossResult forward_loss(std::span<const double> logits, std::size_t label, const NoiseModel& t) {
  const std::size_t k = t.classes();
  require_dims(logits, k, "forward_loss");
  require_label(label, k, "forward_loss");
  const ProbVector p = softmax(logits);
  const std::vector<double> log_p = log_softmax(logits);
  double observed = 0.0;
  std::vector<double> log_terms;
  for (std::size_t i = 0; i < k; ++i) {
    observed += t(i, label) * p[i];
    if (t(i, label) > 0.0) log_terms.push_back(std::log(t(i, label)) + log_p[i]);
  }
  constexpr double kFloor = std::numeric_limits<double>::epsilon();
  LossResult r;
  if (observed < kFloor) {
    r.value = -std::log(kFloor);
    r.grad_logits.assign(k, 0.0);
    return r;
  }
  // ln((T^T p)_label) in the log domain, exact when one term dominates.
  r.value = -log_sum_exp(log_terms);
  std::vector<double> dloss_dp(k);
  for (std::size_t i = 0; i < k; ++i) dloss_dp[i] = -t(i, label) / observed;
  r.grad_logits = softmax_backward(p, dloss_dp);
  return r;
}

LossResult composite_loss(const LossSpec& first, double first_weight, const LossSpec& second,
                          double second_weight, std::span<const double> logits,
                          const LabelContext& ctx) {
  return weighted_sum(evaluate(first, logits, ctx), first_weight, evaluate(second, logits, ctx),
                      second_weight);
}

LossResult evaluate(const LossSpec& spec, std::span<const double> logits, const LabelContext& ctx) {
  if (uses_target(spec.kind)) {
    const ProbVector own = ctx.prediction ? ProbVector{} : softmax(logits);
    const ProbVector& prediction = ctx.prediction ? *ctx.prediction : own;
    require_dims(logits, prediction.size(), "evaluate");
    const TargetDist target = resolve_target(spec, ctx.label, prediction);
    switch (spec.kind) {
      case LossKind::CE: return ce_loss(logits, target);
      case LossKind::RCE: return rce_loss(logits, target, spec.A);
      case LossKind::SL: return sl_loss(logits, target, spec.alpha, spec.beta, spec.A);
      case LossKind::MAE: return mae_loss(logits, target);
      default: break;
    }
  }
  switch (spec.kind) {
    case LossKind::GCE: return gce_loss(logits, ctx.label, spec.gce_exponent);
    case LossKind::Forward:
      if (!spec.transition) throw InvalidParameter("forward loss needs a transition matrix");
      return forward_loss(logits, ctx.label, *spec.transition);
    case LossKind::Composite:
      if (!spec.composite) throw InvalidParameter("composite loss needs two terms");
      return composite_loss(spec.composite->first, spec.composite->first_weight,
                            spec.composite->second, spec.composite->second_weight, logits, ctx);
    default: break;
  }
  throw InvalidParameter("evaluate: unhandled loss kind");
}

double evaluate_probs(const LossSpec& spec, const ProbVector& p, std::size_t label) {
  require_label(label, p.size(), "evaluate_probs");
  if (spec.needs_logits()) {
    throw UnsupportedLoss("loss '" + std::string(to_string(spec.kind)) +
                          "' cannot be evaluated from probabilities alone");
  }
  auto ce = [&](const TargetDist& q) {
    double v = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (q[k] == 0.0) continue;
      if (p[k] == 0.0) return std::numeric_limits<double>::infinity();
      v -= q[k] * std::log(p[k]);
    }
    return v;
  };
  auto rce = [&](const TargetDist& q) {
    double v = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) v -= p[k] * clamped_log(q[k], spec.A);
    return v;
  };
  switch (spec.kind) {
    case LossKind::CE: return ce(resolve_target(spec, label, p));
    case LossKind::RCE: return rce(resolve_target(spec, label, p));
    case LossKind::SL: {
      const TargetDist q = resolve_target(spec, label, p);
      const double c = spec.alpha == 0.0 ? 0.0 : spec.alpha * ce(q);
      return c + spec.beta * rce(q);
    }
    case LossKind::MAE: {
      const TargetDist q = resolve_target(spec, label, p);
      double v = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) v += std::abs(p[k] - q[k]);
      return v;
    }
    case LossKind::GCE: {
      const double q = spec.gce_exponent;
      if (p[label] == 0.0) return 1.0 / q;
      return -std::expm1(q * std::log(p[label])) / q;
    }
    case LossKind::Composite: {
      const auto& c = *spec.composite;
      auto term = [&](const LossSpec& s, double w) {
        return w == 0.0 ? 0.0 : w * evaluate_probs(s, p, label);
      };
      return term(c.first, c.first_weight) + term(c.second, c.second_weight);
    }
    case LossKind::Forward: break;
  }
  throw UnsupportedLoss("evaluate_probs: unhandled loss kind");
}

}  // namespace symce
