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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "symce/data_io.hpp"
#include "symce/errors.hpp"
#include "symce/trainer.hpp"

using namespace symce;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Sizes = std::vector<std::size_t>;

Matrix random_matrix(RngStream& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

double mean_ce(const MlpModel& model, const Matrix& x, const std::vector<std::size_t>& y) {
  const Matrix z = forward(model, x);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    total += ce_loss(z.row(i), one_hot(y[i], model.classes())).value;
  }
  return total / static_cast<double>(x.rows());
}

std::pair<Dataset, Dataset> blobs(std::uint64_t seed, std::size_t per_class = 200) {
  RngStream rng(seed);
  return synthetic_blobs(3, 3, per_class, 10.0, rng);
}

TrainConfig small_config(LossSpec loss) {
  TrainConfig c;
  c.loss = std::move(loss);
  c.hidden = {16};
  c.epochs = 5;
  c.batch_size = 32;
  c.base_lr = 0.05;
  c.lr_milestones = {};
  c.weight_decay = 1e-4;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("init_model is deterministic with He-scaled weights", "[trainer]") {
  const Sizes sizes = {784, 16, 10};
  RngStream a(1), b(1);
  const auto ma = init_model(sizes, a);
  const auto mb = init_model(sizes, b);
  CHECK(ma == mb);
  for (const auto& layer : ma.layers)
    for (double v : layer.bias) CHECK(v == 0.0);

  const auto& w = ma.layers[0].weights;
  REQUIRE(w.rows() == 784);
  REQUIRE(w.cols() == 16);
  double mean = 0.0, sq = 0.0;
  for (double v : w.values()) mean += v;
  mean /= w.size();
  for (double v : w.values()) sq += (v - mean) * (v - mean);
  const double var = sq / (w.size() - 1);
  CHECK_THAT(var, WithinRel(2.0 / 784.0, 0.2));

  RngStream c(1);
  CHECK_NOTHROW(init_model(Sizes{5, 3}, c));
  CHECK_THROWS_AS(init_model(Sizes{5}, c), InvalidParameter);
  CHECK_THROWS_AS(init_model(Sizes{5, 0, 3}, c), InvalidParameter);
}

TEST_CASE("forward examples", "[trainer]") {
  RngStream rng(2);
  auto model = init_model(Sizes{3, 4, 2}, rng);
  for (auto& layer : model.layers) std::fill(layer.weights.values().begin(), layer.weights.values().end(), 0.0);
  const Matrix z = forward(model, random_matrix(rng, 5, 3));
  for (double v : z.values()) CHECK(v == 0.0);

  auto linear = init_model(Sizes{3, 3}, rng);
  linear.layers[0].weights = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const Matrix e1 = Matrix::from_rows({{0, 1, 0}});
  const Matrix col = forward(linear, e1);
  CHECK(col(0, 0) == 4.0);
  CHECK(col(0, 1) == 5.0);
  CHECK(col(0, 2) == 6.0);

  CHECK_THROWS_AS(forward(linear, Matrix(1, 4)), InvalidInput);
}

TEST_CASE("batched forward equals row-by-row forward", "[trainer][property]") {
  RngStream rng(3);
  const auto model = init_model(Sizes{6, 8, 5, 4}, rng);
  const Matrix x = random_matrix(rng, 7, 6);
  const Matrix all = forward(model, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::vector<std::size_t> idx = {i};
    const Matrix one = forward(model, x.gather_rows(idx));
    for (std::size_t j = 0; j < 4; ++j) CHECK_THAT(one(0, j), WithinAbs(all(i, j), 1e-12));
  }
}

TEST_CASE("backward examples", "[trainer]") {
  RngStream rng(4);
  auto model = init_model(Sizes{3, 4}, rng);
  const Matrix x = random_matrix(rng, 1, 3);
  ForwardCache cache;
  const Matrix z = forward(model, x, &cache);

  const auto zero = backward(model, cache, Matrix(1, 4));
  for (double v : zero.weights[0].values()) CHECK(v == 0.0);
  for (double v : zero.bias[0]) CHECK(v == 0.0);

  const std::size_t y = 2;
  const auto r = ce_loss(z.row(0), one_hot(y, 4));
  Matrix g(1, 4);
  for (std::size_t j = 0; j < 4; ++j) g(0, j) = r.grad_logits[j];
  const auto grads = backward(model, cache, g);
  const auto p = softmax(z.row(0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK_THAT(grads.weights[0](i, j), WithinAbs((p[j] - (j == y)) * x(0, i), 1e-14));

  CHECK_THROWS_AS(backward(model, ForwardCache{}, g), InvalidState);
}

TEST_CASE("backward matches finite differences on every parameter", "[trainer]") {
  RngStream rng(5);
  auto model = init_model(Sizes{4, 6, 5, 3}, rng);
  for (auto& layer : model.layers)
    for (double& b : layer.bias) b = 0.1 * rng.normal();
  const Matrix x = random_matrix(rng, 4, 4);
  const std::vector<std::size_t> y = {0, 2, 1, 2};

  ForwardCache cache;
  const Matrix z = forward(model, x, &cache);
  Matrix g(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto r = ce_loss(z.row(i), one_hot(y[i], 3));
    for (std::size_t j = 0; j < 3; ++j) g(i, j) = r.grad_logits[j];
  }
  const auto grads = backward(model, cache, g);

  const double h = 1e-5;
  double max_err = 0.0, max_mag = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = mean_ce(model, x, y);
    param = saved - h;
    const double down = mean_ce(model, x, y);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    max_err = std::max(max_err, std::abs(numeric - analytic));
    max_mag = std::max({max_mag, std::abs(numeric), std::abs(analytic)});
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto w = model.layers[l].weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) probe(w[i], grads.weights[l].values()[i]);
    auto& b = model.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) probe(b[i], grads.bias[l][i]);
  }
  CHECK(max_err / max_mag < 1e-5);
}

TEST_CASE("sgd_step examples", "[trainer]") {
  RngStream rng(6);
  const auto start = init_model(Sizes{3, 2}, rng);
  Gradients g;
  g.weights = {Matrix::from_rows({{1, -1}, {0.5, 2}, {0, 3}})};
  g.bias = {{0.25, -0.5}};

  auto m = start;
  auto opt = OptState::for_model(m, 0.9, 1e-3);
  sgd_step(m, g, opt, 0.0);
  CHECK(m == start);

  m = start;
  opt = OptState::for_model(m, 0.0, 0.0);
  sgd_step(m, g, opt, 0.1);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK_THAT(m.layers[0].weights.values()[i],
               WithinAbs(start.layers[0].weights.values()[i] - 0.1 * g.weights[0].values()[i], 1e-15));
  }

  m = start;
  opt = OptState::for_model(m, 0.9, 0.0);
  sgd_step(m, g, opt, 0.1);
  sgd_step(m, g, opt, 0.1);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK_THAT(m.layers[0].weights.values()[i],
               WithinAbs(start.layers[0].weights.values()[i] - 0.1 * 2.9 * g.weights[0].values()[i], 1e-14));
  }
  CHECK_THAT(m.layers[0].bias[1], WithinAbs(-0.1 * 2.9 * -0.5, 1e-15));
}

TEST_CASE("weight decay skips biases", "[trainer]") {
  RngStream rng(7);
  auto m = init_model(Sizes{2, 2}, rng);
  m.layers[0].bias = {1.0, -1.0};
  const auto start = m;
  Gradients zero;
  zero.weights = {Matrix(2, 2)};
  zero.bias = {{0.0, 0.0}};
  auto opt = OptState::for_model(m, 0.0, 0.5);
  sgd_step(m, zero, opt, 0.1);
  CHECK(m.layers[0].bias == start.layers[0].bias);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK_THAT(m.layers[0].weights.values()[i], WithinAbs(0.95 * start.layers[0].weights.values()[i], 1e-15));
  }
}

TEST_CASE("lr_at follows the step schedule", "[trainer]") {
  TrainConfig c;
  c.base_lr = 0.01;
  c.lr_milestones = {40, 80};
  c.lr_factor = 0.1;
  CHECK_THAT(lr_at(0, c), WithinRel(0.01, 1e-15));
  CHECK_THAT(lr_at(39, c), WithinRel(0.01, 1e-15));
  CHECK_THAT(lr_at(40, c), WithinRel(0.001, 1e-12));
  CHECK_THAT(lr_at(45, c), WithinRel(0.001, 1e-12));
  CHECK_THAT(lr_at(85, c), WithinRel(0.0001, 1e-12));
}

TEST_CASE("TrainConfig validation", "[trainer]") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.lr_milestones = {20, 10};
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c.lr_milestones = {10, 10};
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = TrainConfig{};
  c.lr_factor = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = TrainConfig{};
  c.lr_factor = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("zero epochs gives empty series and an untouched model", "[trainer]") {
  const auto [tr, te] = blobs(1, 20);
  auto c = small_config(LossSpec::ce());
  c.epochs = 0;
  MlpModel trained;
  const auto run = train(tr, te, c, &trained);
  CHECK(run.test_accuracy.empty());
  CHECK(run.class_accuracy.empty());
  CHECK(run.train_loss.empty());
  RngStream init = RngStream(c.seed).substream(0);
  CHECK(trained == init_model(Sizes{3, 16, 3}, init));
}

TEST_CASE("SL with beta = 0 and alpha = 1 trains exactly like CE", "[trainer]") {
  const auto [tr, te] = blobs(2, 60);
  auto c = small_config(LossSpec::ce());
  c.noise = symmetric_matrix(3, 0.3);
  const auto ce = train(tr, te, c);
  c.loss = LossSpec::sl(1.0, 0.0, -4.0);
  const auto sl = train(tr, te, c);
  CHECK(ce.test_accuracy == sl.test_accuracy);
  CHECK(ce.class_accuracy == sl.class_accuracy);
}

TEST_CASE("clean blobs are learned to high accuracy", "[trainer]") {
  const auto [tr, te] = blobs(3);
  auto c = small_config(LossSpec::ce());
  c.epochs = 20;
  const auto run = train(tr, te, c);
  REQUIRE(run.test_accuracy.size() == 20);
  CHECK(run.last_accuracy() > 0.95);
  CHECK(run.train_loss.back() < run.train_loss.front());
}

TEST_CASE("two well separated blobs are learned by softmax regression", "[trainer]") {
  RngStream rng(13);
  const auto [tr, te] = synthetic_blobs(2, 2, 500, 10.0, rng);
  auto c = small_config(LossSpec::ce());
  c.hidden = {};
  c.epochs = 10;
  CHECK(train(tr, te, c).last_accuracy() > 0.99);
}

TEST_CASE("training is bit-identical for identical configs", "[trainer][property]") {
  const auto [tr, te] = blobs(4, 60);
  auto c = small_config(LossSpec::sl(0.1, 1.0, -4.0));
  c.noise = symmetric_matrix(3, 0.4);
  MlpModel ma, mb;
  const auto a = train(tr, te, c, &ma);
  const auto b = train(tr, te, c, &mb);
  CHECK(a.test_accuracy == b.test_accuracy);
  CHECK(a.train_loss == b.train_loss);
  CHECK(a.confusion == b.confusion);
  CHECK(a.realized_noise == b.realized_noise);
  CHECK(ma == mb);
  c.seed = 4;
  CHECK(train(tr, te, c).train_loss != a.train_loss);
}

TEST_CASE("run records are consistent with the test labels", "[trainer][property]") {
  const auto [tr, te] = blobs(5, 60);
  auto c = small_config(LossSpec::ce());
  c.noise = symmetric_matrix(3, 0.5);
  const auto run = train(tr, te, c);
  CHECK(run.realized_noise > 0.3);
  std::vector<std::size_t> support(3, 0);
  for (auto y : te.labels) ++support[y];
  for (std::size_t e = 0; e < run.test_accuracy.size(); ++e) {
    double weighted = 0.0;
    for (std::size_t k = 0; k < 3; ++k) weighted += run.class_accuracy[e][k] * support[k];
    CHECK_THAT(run.test_accuracy[e], WithinAbs(weighted / te.size(), 1e-12));
  }
  // Confusion rows are indexed by the clean test labels.
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t row = 0;
    for (auto v : run.confusion[k]) row += v;
    CHECK(row == support[k]);
  }
  for (const auto& conf : run.clean_confidence) {
    REQUIRE(conf.has_value());
    double s = 0.0;
    for (double v : *conf) s += v;
    CHECK_THAT(s, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("a non-finite loss aborts with the epoch", "[trainer]") {
  const auto [tr, te] = blobs(6, 40);
  auto c = small_config(LossSpec::ce());
  c.base_lr = 1e6;
  c.momentum = 0.99;
  c.hidden = {64, 64};
  c.epochs = 30;
  try {
    train(tr, te, c);
    FAIL("expected divergence");
  } catch (const Divergence& e) {
    CHECK(e.epoch() < 30);
  }
}
