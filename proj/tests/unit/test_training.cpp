// tests/unit/test_training.cpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "avwws/error.hpp"
#include "avwws/grad_check.hpp"
#include "avwws/ops.hpp"
#include "avwws/training.hpp"
#include "oracles.hpp"

using namespace avwws;

namespace {

ModelConfig tiny_config(ModelKind kind = ModelKind::a_transformer) {
  ModelConfig cfg = ModelConfig::desk(kind, 8);
  cfg.encoder.hidden = 16;
  cfg.encoder.n_heads = 2;
  cfg.encoder.ffn = 32;
  cfg.encoder.n_blocks = 1;
  cfg.encoder.conv_kernel = 3;
  cfg.audio.input_dim = 20;
  cfg.audio.hidden = cfg.video.hidden = 16;
  return cfg;
}

// Positives carry a raised band in the first few feature columns.
std::vector<Example> toy_data(std::size_t n, std::uint64_t seed, bool video = false) {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example ex;
    ex.id = "ex" + std::to_string(i);
    ex.label = static_cast<int>(i % 2);
    ex.audio = FeatureMatrix(30, 20, 0.01, FeatureKind::audio);
    ex.audio.data = oracle::random_values(30 * 20, rng, 0.5);
    if (ex.label == 1) {
      for (std::size_t t = 10; t < 20; ++t)
        for (std::size_t d = 0; d < 5; ++d) ex.audio.at(t, d) += 1.5;
    }
    if (video) {
      FeatureMatrix v(12, 8, 0.04, FeatureKind::video);
      v.data = oracle::random_values(12 * 8, rng, 0.5);
      ex.video = v;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TrainConfig stage_config(LossKind loss, long steps) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.lr_peak = 3e-3;
  cfg.warmup_steps = 5;
  cfg.batch_size = 4;
  cfg.max_steps = steps;
  cfg.seed = 17;
  return cfg;
}

double data_loss(const WakeWordModel& model, const std::vector<Example>& data) {
  const auto p = predict_all(model, data);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) acc += ce_value(p[i], data[i].label);
  return acc / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("cross-entropy values") {
  for (int y : {0, 1}) CHECK(ce_value(0.5, y) == doctest::Approx(std::log(2.0)));
  CHECK(ce_value(1.0 - 1e-12, 1) < 1e-11);
  CHECK(ce_value(0.0, 1) == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(ce_value(1.0, 0)));
  const Tensor p = Tensor::constant({3}, {0.2, 0.7, 0.9});
  const std::vector<int> y = {0, 1, 0};
  CHECK(ce_loss(p, y).item() ==
        doctest::Approx((-std::log(0.8) - std::log(0.7) - std::log(0.1)) / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(ce_loss(p, std::vector<int>{0, 1}), ContractError);
  CHECK_THROWS_AS(ce_loss(p, std::vector<int>{0, 2, 1}), ContractError);
}

TEST_CASE("focal loss values") {
  CHECK(focal_value(0.9, 1, 2.0, 0.25) == doctest::Approx(-0.25 * 0.01 * std::log(0.9)).epsilon(1e-12));
  CHECK(focal_value(0.9, 1, 2.0, 0.25) == doctest::Approx(2.634e-4).epsilon(1e-3));
  CHECK(focal_value(1.0 - 1e-12, 1, 2.0, 0.25) < 1e-20);
  CHECK(focal_value(1e-12, 0, 2.0, 0.25) < 1e-20);
  CHECK(focal_value(0.3, 0, 2.0, 0.25) == doctest::Approx(-0.75 * 0.09 * std::log(0.7)).epsilon(1e-12));
}

TEST_CASE("focal loss with gamma 0 and alpha one half is half the cross-entropy") {
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    for (int y : {0, 1}) CHECK(focal_value(p, y, 0.0, 0.5) == 0.5 * ce_value(p, y));
  }
  const Tensor p = Tensor::constant({4}, {0.1, 0.4, 0.6, 0.95});
  const std::vector<int> y = {1, 0, 1, 0};
  CHECK(focal_loss(p, y, 0.0, 0.5).item() == doctest::Approx(0.5 * ce_loss(p, y).item()).epsilon(1e-15));
}

TEST_CASE("focal loss decreases as the true-class probability grows") {
  for (double gamma : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    for (double alpha : {0.25, 0.5, 0.9}) {
      for (int y : {0, 1}) {
        double prev = INFINITY;
        for (int i = 1; i < 1000; ++i) {
          const double pt = i / 1000.0;
          const double v = focal_value(y == 1 ? pt : 1.0 - pt, y, gamma, alpha);
          CHECK(v < prev);
          prev = v;
        }
      }
    }
  }
}

TEST_CASE("batch losses are means of per-example losses") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 7;
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = u(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    double ce = 0.0, fl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ce += ce_value(p[i], y[i]);
      fl += focal_value(p[i], y[i], 2.0, 0.25);
    }
    const Tensor pt = Tensor::constant({n}, p);
    CHECK(ce_loss(pt, y).item() == doctest::Approx(ce / n).epsilon(1e-14));
    CHECK(focal_loss(pt, y, 2.0, 0.25).item() == doctest::Approx(fl / n).epsilon(1e-14));
  }
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(5);
    for (double& v : p) v = u(rng);
    const std::vector<int> y = {1, 0, 0, 1, static_cast<int>(trial % 2)};
    const Tensor pt = Tensor::constant({5}, p);
    CHECK(grad_check([&](const std::vector<Tensor>& in) { return ce_loss(in[0], y); }, {pt}) <= 1e-6);
    CHECK(grad_check([&](const std::vector<Tensor>& in) { return focal_loss(in[0], y, 2.0, 0.25); }, {pt}) <= 1e-6);
    CHECK(grad_check([&](const std::vector<Tensor>& in) { return focal_loss(in[0], y, 0.5, 0.7); }, {pt}) <= 1e-6);
  }
  // dL/dp = (p - y) / (p (1 - p)) for a single example.
  const Tensor p = Tensor::parameter({1}, {0.3});
  backward(ce_loss(p, std::vector<int>{1}));
  CHECK(p.grad()[0] == doctest::Approx((0.3 - 1.0) / (0.3 * 0.7)));
}

TEST_CASE("learning-rate warmup") {
  TrainConfig cfg;
  cfg.lr_peak = 2e-3;
  cfg.warmup_steps = 100;
  CHECK(lr_schedule(100, cfg) == 2e-3);
  CHECK(lr_schedule(50, cfg) == doctest::Approx(1e-3));
  CHECK(lr_schedule(1, cfg) == doctest::Approx(2e-5));
  CHECK(lr_schedule(1000, cfg) == 2e-3);
  double prev = 0.0;
  for (long s = 1; s <= 200; ++s) {
    CHECK(lr_schedule(s, cfg) >= prev);
    prev = lr_schedule(s, cfg);
  }
  cfg.warmup_steps = 0;
  CHECK(lr_schedule(1, cfg) == 2e-3);
  CHECK_THROWS_AS(lr_schedule(0, cfg), ContractError);

  const TrainConfig full = TrainConfig::full_scale(LossKind::ce);
  CHECK(full.lr_peak == 1e-5);
  CHECK(full.warmup_steps == 10000);
  CHECK(full.batch_size == 32);
  CHECK(lr_schedule(10000, full) == 1e-5);
  CHECK(lr_schedule(5000, full) == doctest::Approx(5e-6));
}

TEST_CASE("adam steps") {
  ParameterSet params;
  params.add("w", {3}, {1.0, -2.0, 0.5});
  AdamState state = AdamState::zeros_like(params);
  const ParameterSet before = params;
  adam_step(params, {{0.0, 0.0, 0.0}}, state, 0.1);
  CHECK(params == before);

  AdamState fresh = AdamState::zeros_like(params);
  adam_step(params, {{3.0, -0.01, 1e3}}, fresh, 0.01);
  CHECK(params.value(0)[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(params.value(0)[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(params.value(0)[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
  CHECK(fresh.step == 1);

  CHECK_THROWS_AS(adam_step(params, {{1.0, 2.0}}, fresh, 0.01), ContractError);
  CHECK_THROWS_AS(adam_step(params, {}, fresh, 0.01), ContractError);
}

TEST_CASE("adam minimizes a quadratic") {
  // f(x, y) = (x - 1)^2 + 10 (y + 2)^2
  ParameterSet params;
  params.add("xy", {2}, {-3.0, 4.0});
  AdamState state = AdamState::zeros_like(params);
  int steps = 0;
  for (; steps < 5000; ++steps) {
    const auto v = params.value(0);
    if (std::hypot(v[0] - 1.0, v[1] + 2.0) < 1e-6) break;
    adam_step(params, {{2.0 * (v[0] - 1.0), 20.0 * (v[1] + 2.0)}}, state, 0.05);
  }
  const auto v = params.value(0);
  CHECK(std::hypot(v[0] - 1.0, v[1] + 2.0) < 1e-6);
  CHECK(steps <= 5000);
}

TEST_CASE("batch sampling is a pure function of seed, stage and step") {
  const auto a = sample_batch(100, 8, 3, 1, 5);
  CHECK(a == sample_batch(100, 8, 3, 1, 5));
  CHECK(a != sample_batch(100, 8, 3, 1, 6));
  CHECK(a != sample_batch(100, 8, 3, 2, 5));
  CHECK(a != sample_batch(100, 8, 4, 1, 5));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 8);
  for (std::size_t i : a) CHECK(i < 100);
  CHECK(sample_batch(5, 8, 1, 1, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(sample_batch(0, 8, 1, 1, 1), InputError);

  std::vector<int> hits(20, 0);
  for (long s = 1; s <= 2000; ++s)
    for (std::size_t i : sample_batch(20, 4, 9, 1, s)) ++hits[i];
  for (int h : hits) CHECK(h == doctest::Approx(400).epsilon(0.2));
}

TEST_CASE("batch gradient is the mean of per-example gradients and thread-independent") {
  WakeWordModel model(tiny_config(), 5);
  std::mt19937_64 rng(1);
  auto& head = model.params().value_mut(model.head_weight());
  head = oracle::random_values(head.size(), rng, 0.5);
  const auto data = toy_data(6, 2);
  const std::vector<std::size_t> batch = {0, 3, 5, 1};
  const TrainConfig cfg = stage_config(LossKind::focal, 1);
  const BatchGradient whole = batch_gradient(model, data, batch, cfg, 1, 1);

  double loss = 0.0;
  std::vector<std::vector<double>> summed;
  for (std::size_t i : batch) {
    const BatchGradient one = batch_gradient(model, data, std::vector<std::size_t>{i}, cfg, 1, 1);
    loss += one.loss;
    if (summed.empty()) {
      summed = one.grads;
      for (auto& g : summed) std::fill(g.begin(), g.end(), 0.0);
    }
    for (std::size_t k = 0; k < summed.size(); ++k)
      for (std::size_t j = 0; j < summed[k].size(); ++j) summed[k][j] += one.grads[k][j] / 4.0;
  }
  CHECK(whole.loss == doctest::Approx(loss / 4.0).epsilon(1e-13));
  for (std::size_t k = 0; k < summed.size(); ++k)
    for (std::size_t j = 0; j < summed[k].size(); ++j)
      CHECK(whole.grads[k][j] == doctest::Approx(summed[k][j]).epsilon(1e-9).scale(1e-12));

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const BatchGradient serial = batch_gradient(model, data, batch, cfg, 1, 1);
  omp_set_num_threads(3);
  const BatchGradient parallel = batch_gradient(model, data, batch, cfg, 1, 1);
  omp_set_num_threads(saved);
  CHECK(serial.loss == parallel.loss);
  CHECK(serial.grads == parallel.grads);
}

TEST_CASE("batch gradient matches finite differences of the batch loss") {
  WakeWordModel model(tiny_config(), 6);
  std::mt19937_64 rng(2);
  auto& head = model.params().value_mut(model.head_weight());
  head = oracle::random_values(head.size(), rng, 0.5);
  const auto data = toy_data(4, 3);
  const std::vector<std::size_t> batch = {0, 1, 2, 3};
  const TrainConfig cfg = stage_config(LossKind::ce, 1);
  const BatchGradient bg = batch_gradient(model, data, batch, cfg, 1, 1);
  const double eps = 1e-6;
  for (std::size_t k : {model.head_weight(), model.audio_token(), std::size_t{0}}) {
    for (std::size_t j = 0; j < 3; ++j) {
      WakeWordModel plus = model, minus = model;
      plus.params().value_mut(k)[j] += eps;
      minus.params().value_mut(k)[j] -= eps;
      const double numeric = (batch_gradient(plus, data, batch, cfg, 1, 1).loss -
                              batch_gradient(minus, data, batch, cfg, 1, 1).loss) /
                             (2.0 * eps);
      CHECK(bg.grads[k][j] == doctest::Approx(numeric).epsilon(1e-5).scale(1e-8));
    }
  }
}

TEST_CASE("history lines") {
  std::ostringstream os;
  const std::vector<HistoryRecord> h = {{1, 1, 0.1, 1e-4}, {2, 2, 0.6931471805599453, 2e-4}};
  write_history(os, h);
  CHECK(os.str() == "1 1 0.10000000000000001 0.0001\n2 2 0.69314718055994529 0.00020000000000000001\n");
}

TEST_CASE("two-stage training lowers the loss and is reproducible") {
  const auto data = toy_data(16, 4);
  WakeWordModel a(tiny_config(), 9);
  const double initial = data_loss(a, data);
  TrainState sa;
  CHECK(two_stage_train(a, data, stage_config(LossKind::ce, 40), stage_config(LossKind::focal, 10), sa));
  CHECK(data_loss(a, data) < initial);
  REQUIRE(sa.history.size() == 50);
  CHECK(sa.history[39].stage == 1);
  CHECK(sa.history[40].stage == 2);
  CHECK(sa.history[40].step == 1);
  CHECK(sa.stage == 2);
  CHECK(sa.adam.step == 10);

  WakeWordModel b(tiny_config(), 9);
  TrainState sb;
  two_stage_train(b, data, stage_config(LossKind::ce, 40), stage_config(LossKind::focal, 10), sb);
  CHECK(a.params() == b.params());
  CHECK(sa.history == sb.history);
}

TEST_CASE("an empty second stage returns the stage-one model") {
  const auto data = toy_data(8, 5);
  WakeWordModel a(tiny_config(), 3), b(tiny_config(), 3);
  TrainState sa, sb;
  CHECK(two_stage_train(a, data, stage_config(LossKind::ce, 12), stage_config(LossKind::focal, 0), sa));
  TrainOptions budget;
  budget.step_budget = 12;
  CHECK_FALSE(two_stage_train(b, data, stage_config(LossKind::ce, 12), stage_config(LossKind::focal, 5), sb, budget));
  CHECK(a.params() == b.params());
}

TEST_CASE("interrupted training resumes bit-exactly") {
  for (bool video : {false, true}) {
    const ModelKind kind = video ? ModelKind::av_transformer : ModelKind::a_transformer;
    const auto data = toy_data(10, 6, video);
    TrainConfig s1 = stage_config(LossKind::ce, 9), s2 = stage_config(LossKind::focal, 6);
    s1.spec_augment = s2.spec_augment = true;
    s1.spec_augment_options.max_freq_width = s2.spec_augment_options.max_freq_width = 3;

    WakeWordModel straight(tiny_config(kind), 4);
    TrainState full;
    REQUIRE(two_stage_train(straight, data, s1, s2, full));

    for (long cut : {1L, 9L, 12L}) {
      WakeWordModel first(tiny_config(kind), 4);
      TrainState partial;
      TrainOptions opts;
      opts.step_budget = cut;
      REQUIRE_FALSE(two_stage_train(first, data, s1, s2, partial, opts));
      const std::string bytes = encode_checkpoint(encode_train_state(first, partial));

      WakeWordModel resumed(tiny_config(kind), 1234);
      TrainState state = decode_train_state(resumed, decode_checkpoint(bytes));
      CHECK(state.step == partial.step);
      REQUIRE(two_stage_train(resumed, data, s1, s2, state));
      CHECK(resumed.params() == straight.params());
      CHECK(state.history == full.history);
    }
  }
}

TEST_CASE("training rejects bad configurations and reports divergence") {
  const auto data = toy_data(4, 7);
  WakeWordModel model(tiny_config(), 1);
  TrainState state;
  CHECK_THROWS_AS(
      two_stage_train(model, data, stage_config(LossKind::focal, 2), stage_config(LossKind::focal, 2), state),
      ConfigError);
  CHECK_THROWS_AS(two_stage_train(model, data, stage_config(LossKind::ce, 2), stage_config(LossKind::ce, 2), state),
                  ConfigError);
  TrainConfig bad = stage_config(LossKind::ce, 2);
  bad.lr_peak = 0.0;
  CHECK_THROWS_AS(two_stage_train(model, data, bad, stage_config(LossKind::focal, 2), state), ConfigError);

  WakeWordModel av(tiny_config(ModelKind::av_transformer), 1);
  CHECK_THROWS_AS(
      two_stage_train(av, data, stage_config(LossKind::ce, 2), stage_config(LossKind::focal, 2), state),
      ConfigError);

  model.params().value_mut(model.head_bias())[0] = NAN;
  TrainState fresh;
  try {
    two_stage_train(model, data, stage_config(LossKind::ce, 5), stage_config(LossKind::focal, 2), fresh);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 1);
  }
}
