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

#include "symce/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "symce/errors.hpp"

namespace symce {

namespace {

std::vector<double> dirichlet(std::size_t k, RngStream& rng) {
  std::vector<double> v(k);
  double total = 0.0;
  for (double& x : v) {
    x = -std::log1p(-rng.uniform());
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

NoiseModel random_transition(std::size_t k, RngStream& rng) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < k; ++i) {
    auto row = dirichlet(k, rng);
    // Exact row sums: fold the rounding residue into the largest entry.
    double rest = 0.0;
    const std::size_t top = argmax(row);
    for (std::size_t j = 0; j < k; ++j) {
      if (j != top) rest += row[j];
    }
    row[top] = 1.0 - rest;
    rows.push_back(std::move(row));
  }
  return NoiseModel(Matrix::from_rows(rows), 0.0);
}

// Losses that take a free-form target distribution in the grad check.
bool takes_target(const LossSpec& s) {
  const bool kind_ok = s.kind == LossKind::CE || s.kind == LossKind::RCE ||
                       s.kind == LossKind::SL || s.kind == LossKind::MAE;
  return kind_ok && s.smoothing_eps == 0.0 && s.bootstrap_mode == BootstrapMode::None;
}

LossResult evaluate_on_target(const LossSpec& s, std::span<const double> z, const TargetDist& q) {
  switch (s.kind) {
    case LossKind::CE: return ce_loss(z, q);
    case LossKind::RCE: return rce_loss(z, q, s.A);
    case LossKind::SL: return sl_loss(z, q, s.alpha, s.beta, s.A);
    case LossKind::MAE: return mae_loss(z, q);
    default: break;
  }
  throw InvalidParameter("evaluate_on_target: loss does not take a target");
}

// Keeps MAE away from its kinks |p_k - q_k| = 0, where the derivative is undefined.
bool near_mae_kink(std::span<const double> z, const TargetDist& q) {
  const ProbVector p = softmax(z);
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] > 0.0 && q[k] < 1.0 && std::abs(p[k] - q[k]) < 1e-4) return true;
  }
  return false;
}

// Independent extended-precision evaluator used as the finite-difference
// oracle; its rounding floor sits far below the double-precision losses.
using Real = long double;

std::vector<Real> ref_log_softmax(std::span<const Real> z) {
  std::size_t top = 0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (z[k] > z[top]) top = k;
  }
  Real rest = 0.0L;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k != top) rest += std::exp(z[k] - z[top]);
  }
  const Real norm = std::log1p(rest);
  std::vector<Real> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = (z[k] - z[top]) - norm;
  return out;
}

std::vector<Real> ref_target(const LossSpec& s, std::size_t label, const ProbVector& fixed) {
  const std::size_t k = fixed.size();
  const Real eps = s.smoothing_eps;
  std::vector<Real> q(k, eps / k);
  q[label] = std::min<Real>(1.0L, 1.0L - eps + eps / k);
  if (s.bootstrap_mode == BootstrapMode::None) return q;
  const Real w = s.bootstrap_weight;
  const std::size_t top = argmax(fixed.values());
  for (std::size_t j = 0; j < k; ++j) {
    const Real mix = s.bootstrap_mode == BootstrapMode::Soft ? Real(fixed[j])
                                                             : (j == top ? 1.0L : 0.0L);
    q[j] = std::clamp<Real>(w * q[j] + (1.0L - w) * mix, 0.0L, 1.0L);
  }
  return q;
}

Real ref_value(const LossSpec& s, std::span<const Real> z, std::size_t label,
               const std::vector<Real>* target, const ProbVector& fixed) {
  const auto log_p = ref_log_softmax(z);
  std::vector<Real> p(z.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::exp(log_p[k]);
  const std::vector<Real> q = target ? *target : ref_target(s, label, fixed);
  auto ce = [&] {
    Real v = 0.0L;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (q[k] > 0.0L) v -= q[k] * log_p[k];
    }
    return v;
  };
  auto rce = [&] {
    Real v = 0.0L;
    for (std::size_t k = 0; k < p.size(); ++k) {
      v -= p[k] * (q[k] > 0.0L ? std::max<Real>(std::log(q[k]), s.A) : Real(s.A));
    }
    return v;
  };
  switch (s.kind) {
    case LossKind::CE: return ce();
    case LossKind::RCE: return rce();
    case LossKind::SL: return s.alpha * ce() + s.beta * rce();
    case LossKind::MAE: {
      Real v = 0.0L;
      for (std::size_t k = 0; k < p.size(); ++k) {
        Real rest = 0.0L;
        if (q[k] == 1.0L) {
          for (std::size_t j = 0; j < p.size(); ++j) {
            if (j != k) rest += p[j];
          }
        }
        v += q[k] == 1.0L ? rest : std::abs(p[k] - q[k]);
      }
      return v;
    }
    case LossKind::GCE:
      return -std::expm1(Real(s.gce_exponent) * log_p[label]) / s.gce_exponent;
    case LossKind::Forward: {
      Real observed = 0.0L;
      for (std::size_t i = 0; i < p.size(); ++i) observed += (*s.transition)(i, label) * p[i];
      return -std::log(observed);
    }
    case LossKind::Composite:
      return s.composite->first_weight * ref_value(s.composite->first, z, label, nullptr, fixed) +
             s.composite->second_weight * ref_value(s.composite->second, z, label, nullptr, fixed);
  }
  return 0.0L;
}

std::vector<double> ref_gradient(const LossSpec& s, std::span<const double> z, std::size_t label,
                                 const std::vector<Real>* target, const ProbVector& fixed,
                                 double h) {
  std::vector<Real> x(z.begin(), z.end());
  std::vector<double> g(z.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const Real keep = x[j];
    x[j] = keep + h;
    const Real up = ref_value(s, x, label, target, fixed);
    x[j] = keep - h;
    const Real down = ref_value(s, x, label, target, fixed);
    x[j] = keep;
    g[j] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

}  // namespace

const std::vector<std::string>& loss_preset_names() {
  static const std::vector<std::string> names = {
      "ce",  "rce", "sl",             "mae",           "gce",        "forward",
      "lsr", "bootstrap_soft", "bootstrap_hard", "forward_sl", "lsr_sl"};
  return names;
}

LossSpec make_loss_preset(const std::string& name, const LossParams& params,
                          const NoiseModel* transition) {
  auto need_t = [&]() -> const NoiseModel& {
    if (!transition) throw InvalidParameter("loss '" + name + "' needs a transition matrix");
    return *transition;
  };
  if (name == "ce") return LossSpec::ce();
  if (name == "rce") return LossSpec::rce(params.A);
  if (name == "sl") return LossSpec::sl(params.alpha, params.beta, params.A);
  if (name == "mae") return LossSpec::mae();
  if (name == "gce") return LossSpec::gce(params.gce_exponent);
  if (name == "forward") return LossSpec::forward(need_t());
  if (name == "lsr") return LossSpec::lsr(params.lsr_eps);
  if (name == "bootstrap_soft") {
    return LossSpec::bootstrap(BootstrapMode::Soft, params.bootstrap_soft_weight);
  }
  if (name == "bootstrap_hard") {
    return LossSpec::bootstrap(BootstrapMode::Hard, params.bootstrap_hard_weight);
  }
  if (name == "forward_sl") {
    return LossSpec::combine(LossSpec::forward(need_t()), 1.0, LossSpec::rce(params.A),
                             params.beta);
  }
  if (name == "lsr_sl") {
    LossSpec s = LossSpec::sl(params.alpha, params.beta, params.A);
    s.smoothing_eps = params.lsr_eps;
    return s;
  }
  throw InvalidParameter("unknown loss '" + name + "'");
}

double gradient_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw InvalidInput("gradient_relative_error: length mismatch");
  }
  double diff = 0.0;
  double scale = 1e-6;
  for (std::size_t j = 0; j < analytic.size(); ++j) {
    const double d = std::abs(analytic[j] - numeric[j]);
    if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
    diff = std::max(diff, d);
    scale = std::max({scale, std::abs(analytic[j]), std::abs(numeric[j])});
  }
  return diff / scale;
}

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> z, double h) {
  std::vector<double> x(z.begin(), z.end());
  std::vector<double> g(z.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double keep = x[j];
    x[j] = keep + h;
    const double up = f(x);
    x[j] = keep - h;
    const double down = f(x);
    x[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<GradCheckRow> run_grad_check(const GradCheckOptions& options) {
  if (options.trials == 0) throw InvalidParameter("grad check: trials must be at least 1");
  if (!(options.step > 0.0)) throw InvalidParameter("grad check: step must be positive");
  std::vector<GradCheckRow> rows;
  std::uint64_t cell = 0;
  for (const std::string& name : options.losses) {
    for (std::size_t k : options.classes) {
      if (k < 2) throw InvalidParameter("grad check: class counts must be at least 2");
      RngStream rng(options.seed, cell++);
      const NoiseModel t = random_transition(k, rng);
      const LossSpec spec = make_loss_preset(name, options.params, &t);
      spec.validate();
      const bool target_mode = takes_target(spec);

      GradCheckRow row{name, k, options.trials, 0.0, false};
      std::vector<double> z(k);
      for (std::size_t trial = 0; trial < options.trials; ++trial) {
        for (double& v : z) v = 2.0 * rng.normal();
        if (options.saturate) z[rng.uniform_index(k)] += 30.0;
        const std::size_t label = rng.uniform_index(k);

        const ProbVector fixed = softmax(z);
        LossResult r;
        std::vector<Real> q_ref;
        if (target_mode) {
          std::optional<TargetDist> q;
          do {
            q.emplace(trial % 2 == 0 ? one_hot(label, k) : TargetDist(dirichlet(k, rng)));
          } while (spec.kind == LossKind::MAE && near_mae_kink(z, *q));
          r = evaluate_on_target(spec, z, *q);
          q_ref.assign(q->values().begin(), q->values().end());
        } else {
          r = evaluate(spec, z, LabelContext{label, &fixed});
        }
        const auto num = ref_gradient(spec, z, label, target_mode ? &q_ref : nullptr, fixed,
                                      options.step);
        const double err = gradient_relative_error(r.grad_logits, num);
        row.max_rel_err = std::max(row.max_rel_err, err);
      }
      row.passed = row.max_rel_err < options.tolerance;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace symce
