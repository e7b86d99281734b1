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

#include "symce/trainer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "symce/errors.hpp"

namespace symce {

namespace {

// Evaluation batch size; bounds the activation memory for large test sets.
constexpr std::size_t kEvalChunk = 2000;

void add_bias_relu(Matrix& z, const std::vector<double>& bias, bool relu) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v = row[j] + bias[j];
      row[j] = relu && v < 0.0 ? 0.0 : v;
    }
  }
}

// `epoch` names the Divergence raised on non-finite logits.
Matrix probabilities(const MlpModel& model, const Matrix& features, std::size_t epoch) {
  Matrix out(features.rows(), model.classes());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < features.rows(); start += kEvalChunk) {
    const std::size_t stop = std::min(features.rows(), start + kEvalChunk);
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const Matrix logits = forward(model, features.gather_rows(idx));
    for (double v : logits.values()) {
      if (!std::isfinite(v)) throw Divergence(epoch, "non-finite logits");
    }
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const ProbVector p = softmax(logits.row(i));
      std::copy(p.values().begin(), p.values().end(), out.row(start + i).begin());
    }
  }
  return out;
}

}  // namespace

MlpModel init_model(std::span<const std::size_t> layer_sizes, RngStream& rng) {
  if (layer_sizes.size() < 2) throw InvalidParameter("init_model: need input and output sizes");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw InvalidParameter("init_model: zero-size layer");
  }
  MlpModel model;
  model.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l];
    const std::size_t fan_out = layer_sizes[l + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
    for (double& w : layer.weights.values()) w = scale * rng.normal();
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Matrix forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache) {
  if (batch.cols() != model.input_size()) {
    throw InvalidInput("forward: batch has " + std::to_string(batch.cols()) +
                       " columns, model expects " + std::to_string(model.input_size()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->valid = false;
  }
  Matrix act = batch;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const bool hidden = l + 1 < model.layers.size();
    Matrix z;
    gemm(act, model.layers[l].weights, z);
    add_bias_relu(z, model.layers[l].bias, hidden);
    if (cache) cache->inputs.push_back(std::move(act));
    act = std::move(z);
  }
  if (cache) cache->valid = true;
  return act;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_logits) {
  if (!cache.valid || cache.inputs.size() != model.layers.size()) {
    throw InvalidState("backward: no forward cache for this model");
  }
  const std::size_t n = cache.inputs.front().rows();
  if (grad_logits.rows() != n || grad_logits.cols() != model.classes()) {
    throw InvalidInput("backward: grad_logits shape does not match the forward output");
  }
  Gradients g;
  g.weights.resize(model.layers.size());
  g.bias.resize(model.layers.size());

  Matrix delta = grad_logits;
  const double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;
  for (double& v : delta.values()) v *= inv_n;

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Matrix& input = cache.inputs[l];
    gemm_tn(input, delta, g.weights[l]);
    auto& db = g.bias[l];
    db.assign(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      const auto row = delta.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) db[j] += row[j];
    }
    if (l == 0) break;
    Matrix upstream;
    gemm_nt(delta, model.layers[l].weights, upstream);
    // ReLU mask: the cached input of layer l is relu(pre-activation of l-1).
    auto up = upstream.values();
    const auto act = input.values();
    for (std::size_t i = 0; i < up.size(); ++i) {
      if (act[i] <= 0.0) up[i] = 0.0;
    }
    delta = std::move(upstream);
  }
  return g;
}

OptState OptState::for_model(const MlpModel& model, double momentum, double weight_decay) {
  OptState s;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const auto& layer : model.layers) {
    s.weight_velocity.emplace_back(layer.weights.rows(), layer.weights.cols());
    s.bias_velocity.emplace_back(layer.bias.size(), 0.0);
  }
  return s;
}

void sgd_step(MlpModel& model, const Gradients& grads, OptState& opt, double lr) {
  if (grads.weights.size() != model.layers.size() ||
      opt.weight_velocity.size() != model.layers.size()) {
    throw InvalidInput("sgd_step: gradient/optimizer state does not match the model");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto w = model.layers[l].weights.values();
    const auto gw = grads.weights[l].values();
    auto vw = opt.weight_velocity[l].values();
    if (gw.size() != w.size()) throw InvalidInput("sgd_step: weight shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      vw[i] = opt.momentum * vw[i] + gw[i] + opt.weight_decay * w[i];
      w[i] -= lr * vw[i];
    }
    auto& b = model.layers[l].bias;
    const auto& gb = grads.bias[l];
    auto& vb = opt.bias_velocity[l];
    for (std::size_t j = 0; j < b.size(); ++j) {
      vb[j] = opt.momentum * vb[j] + gb[j];
      b[j] -= lr * vb[j];
    }
  }
}

void TrainConfig::validate() const {
  loss.validate();
  if (batch_size == 0) throw InvalidParameter("TrainConfig: batch_size must be positive");
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) {
    throw InvalidParameter("TrainConfig: base_lr must be finite and >= 0");
  }
  if (!(lr_factor > 0.0 && lr_factor <= 1.0)) {
    throw InvalidParameter("TrainConfig: lr_factor must lie in (0, 1]");
  }
  for (std::size_t i = 1; i < lr_milestones.size(); ++i) {
    if (lr_milestones[i] <= lr_milestones[i - 1]) {
      throw InvalidParameter("TrainConfig: milestones must be strictly increasing");
    }
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidParameter("TrainConfig: momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw InvalidParameter("TrainConfig: weight_decay must be >= 0");
  for (std::size_t h : hidden) {
    if (h == 0) throw InvalidParameter("TrainConfig: zero-size hidden layer");
  }
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  const auto passed = std::count_if(config.lr_milestones.begin(), config.lr_milestones.end(),
                                    [epoch](std::size_t m) { return m <= epoch; });
  return config.base_lr * std::pow(config.lr_factor, static_cast<double>(passed));
}

double TrainRun::best_accuracy() const {
  return test_accuracy.empty() ? 0.0
                               : *std::max_element(test_accuracy.begin(), test_accuracy.end());
}

TrainRun train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& config,
               MlpModel* final_model) {
  config.validate();
  train_set.validate();
  test_set.validate();
  const std::size_t k = train_set.classes;
  if (test_set.classes != k || test_set.dim() != train_set.dim()) {
    throw InvalidInput("train: train and test sets disagree on classes or dimension");
  }
  if (config.noise && config.noise->classes() != k) {
    throw InvalidParameter("train: noise model class count does not match the dataset");
  }

  const RngStream root(config.seed);
  RngStream init_rng = root.substream(0);
  RngStream noise_rng = root.substream(1);
  RngStream order_rng = root.substream(2);

  TrainRun run;
  run.config = config;

  std::vector<std::size_t> labels = train_set.labels;
  std::vector<bool> clean_mask(labels.size(), true);
  if (config.noise) {
    CorruptionRecord rec = corrupt(train_set.labels, *config.noise, noise_rng);
    labels = std::move(rec.noisy_labels);
    clean_mask = std::move(rec.clean_mask);
    run.realized_noise = rec.realized_rate;
  }

  std::vector<std::size_t> sizes;
  sizes.push_back(train_set.dim());
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(k);
  MlpModel model = init_model(sizes, init_rng);
  OptState opt = OptState::for_model(model, config.momentum, config.weight_decay);

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  ForwardCache cache;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix logits = forward(model, train_set.features.gather_rows(idx), &cache);
      for (double v : logits.values()) {
        if (!std::isfinite(v)) throw Divergence(epoch, "non-finite logits");
      }
      Matrix grad(idx.size(), k);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const LossResult r = evaluate(config.loss, logits.row(i), LabelContext{labels[idx[i]]});
        if (!std::isfinite(r.value)) throw Divergence(epoch, "non-finite training loss");
        loss_sum += r.value;
        std::copy(r.grad_logits.begin(), r.grad_logits.end(), grad.row(i).begin());
      }
      sgd_step(model, backward(model, cache, grad), opt, lr);
    }
    run.train_loss.push_back(n ? loss_sum / static_cast<double>(n) : 0.0);

    const auto preds = predict_labels(probabilities(model, test_set.features, epoch));
    const ClasswiseReport report = classwise_accuracy(preds, test_set.labels, k);
    run.test_accuracy.push_back(report.overall);
    run.class_accuracy.push_back(report.per_class);
    run.class_spread.push_back(report.spread);
  }

  const std::size_t last = config.epochs ? config.epochs - 1 : 0;
  const auto preds = predict_labels(probabilities(model, test_set.features, last));
  run.confusion = confusion_matrix(preds, test_set.labels, k);
  run.prediction = prediction_distribution(preds, test_set.labels, k);

  const Matrix train_probs = probabilities(model, train_set.features, last);
  run.clean_confidence.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    try {
      run.clean_confidence[c] = clean_subset_confidence(train_probs, labels, clean_mask, c);
    } catch (const EmptySubset&) {
      run.clean_confidence[c].reset();
    }
  }

  if (final_model) *final_model = std::move(model);
  return run;
}

}  // namespace symce
