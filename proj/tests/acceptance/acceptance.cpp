// tests/acceptance/acceptance.cpp

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

// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "avwws/augment.hpp"
#include "avwws/checkpoint.hpp"
#include "avwws/eval.hpp"
#include "avwws/features.hpp"
#include "avwws/grad_check.hpp"
#include "avwws/models.hpp"
#include "avwws/ops.hpp"
#include "avwws/synth.hpp"
#include "avwws/training.hpp"
#include "oracles.hpp"

using namespace avwws;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  const std::size_t n = numel(shape);
  return Tensor::constant(std::move(shape), oracle::random_values(n, rng, scale));
}

Tensor positive_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor::constant(std::move(shape), std::move(v));
}

// ---------------------------------------------------------------------------
// 1. gradient suite

struct OpCase {
  std::string name;
  std::function<std::pair<TensorFn, std::vector<Tensor>>(std::mt19937_64&)> make;
};

// Contracts the op output against fixed random weights so every output
// element contributes to the scalar.
TensorFn contracted(std::function<Tensor(const std::vector<Tensor>&)> op, Tensor weights) {
  return [op, weights](const std::vector<Tensor>& in) { return ops::sum(ops::mul(op(in), weights)); };
}

std::vector<OpCase> op_cases() {
  auto unary = [](std::string name, std::function<Tensor(const Tensor&)> f, Shape shape, Shape out) {
    return OpCase{name, [=](std::mt19937_64& rng) {
                    return std::make_pair(contracted([f](const auto& in) { return f(in[0]); }, random_tensor(out, rng)),
                                          std::vector<Tensor>{random_tensor(shape, rng)});
                  }};
  };
  auto binary = [](std::string name, std::function<Tensor(const Tensor&, const Tensor&)> f, Shape a, Shape b,
                   Shape out) {
    return OpCase{name, [=](std::mt19937_64& rng) {
                    return std::make_pair(
                        contracted([f](const auto& in) { return f(in[0], in[1]); }, random_tensor(out, rng)),
                        std::vector<Tensor>{random_tensor(a, rng), random_tensor(b, rng)});
                  }};
  };
  std::vector<OpCase> cases = {
      binary("add", ops::add, {3, 4}, {3, 4}, {3, 4}),
      binary("sub", ops::sub, {3, 4}, {3, 4}, {3, 4}),
      binary("mul", ops::mul, {3, 4}, {3, 4}, {3, 4}),
      unary("scale", [](const Tensor& x) { return ops::scale(x, -1.7); }, {5}, {5}),
      binary("scale_by", ops::scale_by, {2, 3}, {1}, {2, 3}),
      binary("add_bias", ops::add_bias, {2, 3, 4}, {4}, {2, 3, 4}),
      unary("relu", ops::relu, {4, 5}, {4, 5}),
      unary("sigmoid", ops::sigmoid, {4, 5}, {4, 5}),
      unary("swish", ops::swish, {4, 5}, {4, 5}),
      unary("glu", ops::glu, {3, 6}, {3, 3}),
      unary("sum", ops::sum, {3, 4}, {1}),
      unary("mean", ops::mean, {3, 4}, {1}),
      binary("matmul", ops::matmul, {3, 5}, {5, 2}, {3, 2}),
      unary("transpose", ops::transpose, {3, 5}, {5, 3}),
      unary("softmax_rows", [](const Tensor& x) { return ops::softmax(x, 1); }, {3, 5}, {3, 5}),
      unary("softmax_cols", [](const Tensor& x) { return ops::softmax(x, 0); }, {3, 5}, {3, 5}),
      unary("reshape", [](const Tensor& x) { return ops::reshape(x, {6, 2}); }, {3, 4}, {6, 2}),
      unary("slice_rows", [](const Tensor& x) { return ops::slice_rows(x, 1, 2); }, {4, 3}, {2, 3}),
      unary("slice_cols", [](const Tensor& x) { return ops::slice_cols(x, 1, 2); }, {3, 4}, {3, 2}),
      binary("concat_rows", [](const Tensor& a, const Tensor& b) { return ops::concat_rows({a, b}); }, {2, 3},
             {4, 3}, {6, 3}),
      binary("concat_cols", [](const Tensor& a, const Tensor& b) { return ops::concat_cols({a, b}); }, {3, 2},
             {3, 4}, {3, 6}),
      unary("gather_rows", [](const Tensor& x) { return ops::gather_rows(x, {2, 0, 2, 1, 2}); }, {3, 4}, {5, 4}),
      binary("conv2d", [](const Tensor& x, const Tensor& k) { return ops::conv2d(x, k, {2, 1}); }, {7, 6, 2},
             {3, 2, 2, 3}, {3, 5, 3}),
      binary("depthwise_conv1d", ops::depthwise_conv1d, {6, 4}, {3, 4}, {6, 4}),
  };
  cases.push_back({"linear", [](std::mt19937_64& rng) {
                     return std::make_pair(contracted([](const auto& in) { return ops::linear(in[0], in[1], in[2]); },
                                                      random_tensor({3, 2}, rng)),
                                           std::vector<Tensor>{random_tensor({3, 4}, rng), random_tensor({4, 2}, rng),
                                                               random_tensor({2}, rng)});
                   }});
  cases.push_back({"layer_norm", [](std::mt19937_64& rng) {
                     return std::make_pair(
                         contracted([](const auto& in) { return ops::layer_norm(in[0], in[1], in[2]); },
                                    random_tensor({3, 5}, rng)),
                         std::vector<Tensor>{random_tensor({3, 5}, rng), random_tensor({5}, rng),
                                             random_tensor({5}, rng)});
                   }});
  cases.push_back({"multi_head_attention", [](std::mt19937_64& rng) {
                     return std::make_pair(
                         contracted(
                             [](const auto& in) {
                               return ops::multi_head_attention(in[0], in[1], in[2], 2, in[3], in[4]);
                             },
                             random_tensor({4, 6}, rng)),
                         std::vector<Tensor>{random_tensor({4, 6}, rng), random_tensor({4, 6}, rng),
                                             random_tensor({4, 6}, rng), random_tensor({6, 6}, rng, 0.5),
                                             random_tensor({6}, rng)});
                   }});
  cases.push_back({"ce_loss", [](std::mt19937_64& rng) {
                     const std::vector<int> y = {1, 0, 1, 0};
                     return std::make_pair(TensorFn([y](const auto& in) { return ce_loss(in[0], y); }),
                                           std::vector<Tensor>{positive_tensor({4}, rng, 0.05, 0.95)});
                   }});
  cases.push_back({"focal_loss", [](std::mt19937_64& rng) {
                     const std::vector<int> y = {1, 0, 0, 1};
                     return std::make_pair(TensorFn([y](const auto& in) { return focal_loss(in[0], y, 2.0, 0.25); }),
                                           std::vector<Tensor>{positive_tensor({4}, rng, 0.05, 0.95)});
                   }});
  return cases;
}

struct ModelCase {
  std::string name;
  ModelConfig cfg;
};

std::vector<ModelCase> model_cases() {
  std::vector<ModelCase> out = {{"a-transformer", ModelConfig::desk(ModelKind::a_transformer)},
                                {"a-conformer", ModelConfig::desk(ModelKind::a_conformer)}};
  for (FusionSite site : {FusionSite::conv, FusionSite::attention}) {
    for (FusionOperator op : {FusionOperator::weighted_sum, FusionOperator::product}) {
      ModelConfig cfg = ModelConfig::desk(ModelKind::av_transformer);
      cfg.fusion.site = site;
      cfg.fusion.op = op;
      out.push_back({"av-" + to_string(site) + "-" + to_string(op), cfg});
    }
  }
  return out;
}

FeatureMatrix random_features(std::size_t t, std::size_t d, std::mt19937_64& rng, FeatureKind kind) {
  FeatureMatrix f(t, d, kind == FeatureKind::audio ? 0.01 : 0.04, kind);
  f.data = oracle::random_values(t * d, rng);
  return f;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst_op = 0.0, worst_model = 0.0;
  std::string worst_op_name, worst_model_name;
  const auto cases = op_cases();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const OpCase& c : cases) {
      std::mt19937_64 rng(seed * 1000 + 17);
      const auto [f, inputs] = c.make(rng);
      const double err = grad_check(f, inputs, 1e-6);
      if (!(err <= worst_op)) {
        worst_op = err;
        worst_op_name = c.name;
      }
    }
  }
  // Full models on a two-frame input, sampled coordinates of every
  // parameter, head randomized so that gradients reach the encoder.
  for (const ModelCase& mc : model_cases()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      WakeWordModel model(mc.cfg, seed);
      std::mt19937_64 rng(seed + 99);
      auto& head = model.params().value_mut(model.head_weight());
      head = oracle::random_values(head.size(), rng, 0.3);
      const FeatureMatrix a = random_features(11, 63, rng, FeatureKind::audio);
      const FeatureMatrix v = random_features(6, 16, rng, FeatureKind::video);
      const bool av = mc.cfg.uses_video();
      const TensorFn f = [&](const std::vector<Tensor>& in) {
        return model.forward(Binding(in), a, av ? &v : nullptr);
      };
      const double err = grad_check_sampled(f, model.params().bind(true).tensors(), 4, seed, 1e-6);
      if (!(err <= worst_model)) {
        worst_model = err;
        worst_model_name = mc.name;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = worst_op <= 1e-4 && worst_model <= 1e-3 && elapsed < 120.0;
  o.detail = std::to_string(cases.size()) + " ops x 20 seeds max rel err " + fmt("%.2e", worst_op) + " (" +
             worst_op_name + ", tol 1e-4); 6 models x 20 seeds max " + fmt("%.2e", worst_model) + " (" +
             worst_model_name + ", tol 1e-3); " + fmt("%.1f", elapsed) + " s (limit 120 s)";
  return o;
}

// ---------------------------------------------------------------------------
// 2-4. metrics, vote, focal reduction

Outcome metrics_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 2 + rng() % 200;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2);
      s[i] = i % 7 == 0 ? std::round(u(rng) * 20.0) / 20.0 : u(rng);
    }
    const double thr = std::round(u(rng) * 20.0) / 20.0;
    const EvalCounts c = confusion_counts(s, y, thr);
    const oracle::Tally t = oracle::tally(s, y, thr);
    if (c.tp != static_cast<std::size_t>(t.tp) || c.fp != static_cast<std::size_t>(t.fp) ||
        c.tn != static_cast<std::size_t>(t.tn) || c.fn != static_cast<std::size_t>(t.fn)) {
      ++mismatches;
      continue;
    }
    const Metrics m = metrics(c);
    const double frr = static_cast<double>(t.fn) / static_cast<double>(t.fn + t.tp);
    const double far = static_cast<double>(t.fp) / static_cast<double>(t.fp + t.tn);
    worst = std::max({worst, std::abs(m.frr - frr), std::abs(m.far - far), std::abs(m.score - (frr + far))});
  }
  return {mismatches == 0 && worst <= 1e-12,
          "1000 random sets, " + std::to_string(mismatches) + " count mismatches, max ratio error " +
              fmt("%.1e", worst) + " (tol 1e-12)"};
}

Outcome vote_table() {
  std::size_t bad = 0;
  for (int a : {0, 1})
    for (int b : {0, 1})
      for (int c : {0, 1})
        if (majority_vote(a, b, c) != (a + b + c >= 2 ? 1 : 0)) ++bad;
  std::mt19937_64 rng(7);
  std::size_t bad_perm = 0;
  for (int i = 0; i < 1000; ++i) {
    int v[3] = {static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    const int ref = majority_vote(v[0], v[1], v[2]);
    std::sort(v, v + 3);
    do {
      if (majority_vote(v[0], v[1], v[2]) != ref) ++bad_perm;
    } while (std::next_permutation(v, v + 3));
  }
  return {bad == 0 && bad_perm == 0, "truth table " + std::to_string(8 - bad) + "/8, permutation violations " +
                                         std::to_string(bad_perm) + " over 1000 triples"};
}

Outcome focal_reduction() {
  double worst = 0.0;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    for (int y : {0, 1}) worst = std::max(worst, std::abs(focal_value(p, y, 0.0, 0.5) - 0.5 * ce_value(p, y)));
  }
  return {worst <= 1e-12, "99 p values x 2 labels, max |focal - ce/2| = " + fmt("%.1e", worst) + " (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 5-6. training on the synthetic corpus

std::vector<Example> synthetic_set() {
  SyntheticSpec spec;
  spec.n_positive = spec.n_negative = 16;
  std::vector<Example> data;
  std::vector<FeatureMatrix> raw;
  for (std::size_t i = 0; i < 16; ++i) {
    for (ClipKind kind : {ClipKind::wake, negative_kind(i)}) {
      const SyntheticClip c = synthesize_clip(spec, kind, i);
      Example ex;
      ex.id = (kind == ClipKind::wake ? "pos" : "neg") + std::to_string(i);
      ex.label = c.label;
      ex.audio = compute_fbank(c.audio);
      ex.video = c.video;
      raw.push_back(ex.audio);
      data.push_back(std::move(ex));
    }
  }
  const CmvnStats stats = compute_cmvn_stats(raw);
  for (Example& ex : data) ex.audio = apply_cmvn(ex.audio, stats);
  return data;
}

struct OverfitResult {
  double score = 2.0;
  long steps = 0;
  double seconds = 0.0;
};

OverfitResult overfit(const ModelConfig& cfg, const std::vector<Example>& data, long stage1_steps, long stage2_steps) {
  const auto t0 = Clock::now();
  WakeWordModel model(cfg, 1);
  TrainConfig s1;
  s1.loss = LossKind::ce;
  s1.lr_peak = 1e-3;
  s1.warmup_steps = 50;
  s1.batch_size = 8;
  s1.max_steps = stage1_steps;
  s1.seed = 1;
  TrainConfig s2 = s1;
  s2.loss = LossKind::focal;
  s2.max_steps = stage2_steps;
  TrainState state;
  two_stage_train(model, data, s1, s2, state);
  std::vector<int> y;
  for (const Example& ex : data) y.push_back(ex.label);
  OverfitResult r;
  r.score = metrics(confusion_counts(predict_all(model, data), y, 0.5)).score;
  r.steps = stage1_steps + stage2_steps;
  r.seconds = seconds_since(t0);
  return r;
}

Outcome synthetic_overfit(const std::vector<Example>& data) {
  const OverfitResult t = overfit(ModelConfig::desk(ModelKind::a_transformer), data, 300, 100);
  std::cerr << "  a-transformer score " << t.score << " in " << t.seconds << " s\n";
  const OverfitResult c = overfit(ModelConfig::desk(ModelKind::a_conformer), data, 300, 100);
  std::cerr << "  a-conformer score " << c.score << " in " << c.seconds << " s\n";
  const bool pass = t.score == 0.0 && t.steps <= 2000 && t.seconds < 600.0 && c.score == 0.0 && c.steps <= 3000 &&
                    c.seconds < 600.0;
  return {pass, "32 clips: a-transformer SCORE " + fmt("%g", t.score) + " after " + std::to_string(t.steps) +
                    " steps (" + fmt("%.0f", t.seconds) + " s); a-conformer SCORE " + fmt("%g", c.score) + " after " +
                    std::to_string(c.steps) + " steps (" + fmt("%.0f", c.seconds) + " s)"};
}

Outcome av_sanity(const std::vector<Example>& data) {
  ModelConfig av_cfg = ModelConfig::desk(ModelKind::av_transformer);
  av_cfg.fusion = {FusionSite::attention, FusionOperator::weighted_sum, 1.0, 0.0};
  WakeWordModel av(av_cfg, 11);
  std::mt19937_64 rng(5);
  auto& head = av.params().value_mut(av.head_weight());
  head = oracle::random_values(head.size(), rng, 0.3);
  WakeWordModel audio(ModelConfig::desk(ModelKind::a_transformer), 12);
  load_named_arrays(audio.params(), to_named_arrays(av.params()));
  std::size_t unequal = 0;
  for (const Example& ex : data) {
    if (av.predict(ex.audio, &*ex.video) != audio.predict(ex.audio)) ++unequal;
  }
  std::string detail = "degenerate fusion bit-equal on " + std::to_string(data.size() - unequal) + "/" +
                       std::to_string(data.size()) + " clips; SCORE";
  bool pass = unequal == 0;
  for (FusionSite site : {FusionSite::conv, FusionSite::attention}) {
    for (FusionOperator op : {FusionOperator::weighted_sum, FusionOperator::product}) {
      ModelConfig cfg = ModelConfig::desk(ModelKind::av_transformer);
      cfg.fusion.site = site;
      cfg.fusion.op = op;
      const OverfitResult r = overfit(cfg, data, 300, 100);
      std::cerr << "  av " << to_string(site) << "/" << to_string(op) << " score " << r.score << " in " << r.seconds
                << " s\n";
      pass = pass && r.score == 0.0;
      detail += " " + to_string(site) + "/" + to_string(op) + "=" + fmt("%g", r.score);
    }
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 7. ensemble fixture

Outcome ensemble_fixture() {
  const std::size_t n = 60;
  std::vector<LabelRecord> labels;
  std::vector<double> truth;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back({"utt" + std::to_string(i), static_cast<int>(i % 2)});
    truth.push_back(i % 2 ? 0.8 : 0.2);
  }
  std::vector<std::vector<ScoreRecord>> lists;
  double best_single = INFINITY;
  std::vector<int> y;
  for (const auto& l : labels) y.push_back(l.label);
  for (std::size_t m = 0; m < 3; ++m) {
    // Model m flips the utterances with i % 6 in {2m, 2m + 1}: one positive
    // and one negative out of every six, disjoint across models.
    std::vector<double> s = truth;
    for (std::size_t i = 0; i < n; ++i)
      if (i % 6 / 2 == m) s[i] = 1.0 - s[i];
    best_single = std::min(best_single, metrics(confusion_counts(s, y, 0.5)).score);
    std::vector<ScoreRecord> list;
    for (std::size_t i = 0; i < n; ++i) list.push_back({labels[i].id, s[i]});
    lists.push_back(std::move(list));
  }
  const double thr[3] = {0.5, 0.5, 0.5};
  const double ens = ensemble_eval(lists, thr, labels).score;
  return {ens < best_single,
          "ensemble SCORE " + fmt("%g", ens) + " vs best single " + fmt("%g", best_single)};
}

// ---------------------------------------------------------------------------
// 8. DSP properties

double peak_hz(const std::vector<double>& x, std::size_t from, std::size_t n, double sr) {
  std::vector<double> seg(x.begin() + static_cast<long>(from), x.begin() + static_cast<long>(from + n));
  for (std::size_t i = 0; i < n; ++i) seg[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  const auto spec = oracle::dft(seg);
  std::size_t best = 1;
  for (std::size_t k = 1; k < n / 2; ++k)
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  return static_cast<double>(best) * sr / static_cast<double>(n);
}

double late_ratio(const std::vector<double>& y, const std::vector<double>& s, std::size_t max_lag,
                  std::size_t late_from) {
  double ss = 0.0;
  for (double v : s) ss += v * v;
  double late = 0.0, total = 0.0;
  for (std::size_t lag = 0; lag < max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t n = lag; n < s.size(); ++n) c += y[n] * s[n - lag];
    const double h = c / ss;
    total += h * h;
    if (lag > late_from) late += h * h;
  }
  return late / total;
}

Outcome dsp_properties() {
  const double sr = 16000.0;
  std::vector<std::string> failures;

  double worst_snr = 0.0;
  std::vector<double> tone(8000);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2.0 * std::numbers::pi * 300.0 * i / sr);
  const Waveform clean = Waveform::mono(tone, sr);
  for (int snr = -15; snr <= 15; snr += 5) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed), nrng(seed + 100);
      const Waveform noise = Waveform::mono(oracle::random_values(seed % 2 ? 20000 : 3000, nrng), sr);
      const Waveform mixed = mix_noise(clean, noise, snr, rng);
      std::vector<double> added(tone.size());
      for (std::size_t i = 0; i < added.size(); ++i) added[i] = mixed.channels[0][i] - tone[i];
      worst_snr = std::max(worst_snr, std::abs(10.0 * std::log10(oracle::power(tone) / oracle::power(added)) - snr));
    }
  }
  if (!(worst_snr <= 0.01)) failures.push_back("snr");

  double worst_len = 0.0, worst_pitch = 0.0;
  for (double ratio : {0.9, 1.1}) {
    std::mt19937_64 rng(3);
    for (std::size_t n : {9000u, 16000u, 12345u}) {
      const Waveform y = speed_perturb(Waveform::mono(oracle::random_values(n, rng), sr), ratio);
      worst_len = std::max(worst_len, std::abs(static_cast<double>(y.num_samples()) - n / ratio));
    }
    std::vector<double> s(16000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * i / sr);
    const Waveform y = speed_perturb(Waveform::mono(s, sr), ratio);
    worst_pitch = std::max(worst_pitch, std::abs(peak_hz(y.channels[0], 2000, 4096, sr) / (1000.0 * ratio) - 1.0));
  }
  if (!(worst_len <= 1.0)) failures.push_back("speed length");
  if (!(worst_pitch <= 0.01)) failures.push_back("speed pitch");

  std::size_t wpe_ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const std::vector<double> dry = oracle::random_values(32000, rng);
    Waveform wet;
    wet.sample_rate = sr;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int c = 0; c < 2; ++c) {
      std::vector<double> h(3000);
      h[0] = 1.0;
      const double decay = 3.0 * std::log(10.0) / (0.5 * sr);
      for (std::size_t i = 1; i < h.size(); ++i) h[i] = 0.3 * g(rng) * std::exp(-decay * static_cast<double>(i));
      auto full = oracle::convolve(dry, h);
      full.resize(dry.size());
      wet.channels.push_back(std::move(full));
    }
    const Waveform out = wpe_dereverb(wet);
    const std::size_t late = static_cast<std::size_t>(0.05 * sr);
    if (late_ratio(out.channels[0], dry, 2400, late) < late_ratio(wet.channels[0], dry, 2400, late) &&
        oracle::power(out.channels[0]) <= 1.01 * oracle::power(wet.channels[0]))
      ++wpe_ok;
  }
  if (wpe_ok != 10) failures.push_back("wpe");

  RoomSpec room;
  room.dimensions = {5.0, 4.0, 3.0};
  room.source = {1.3, 2.6, 1.7};
  room.mics = {{3.4, 1.1, 1.2}};
  room.rt60 = 0.4;
  room.max_reflection_order = 1;
  const Waveform rir = simulate_rir(room, sr);
  const auto taps = std::count_if(rir.channels[0].begin(), rir.channels[0].end(), [](double v) { return v != 0.0; });
  if (taps != 7) failures.push_back("rir");

  std::string detail = "snr err " + fmt("%.1e", worst_snr) + " dB; speed length err " + fmt("%.2f", worst_len) +
                       " samples, pitch err " + fmt("%.2f", 100.0 * worst_pitch) + "%; wpe " +
                       std::to_string(wpe_ok) + "/10 fixtures improved; order-1 rir taps " + std::to_string(taps);
  if (!failures.empty()) {
    detail += "; failing:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// 9. serialization

Outcome serialization(const std::vector<Example>& data) {
  const auto dir = std::filesystem::temp_directory_path() / ("avwws_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  bool ok = true;
  std::string detail;

  const WakeWordModel model(ModelConfig::desk(ModelKind::av_transformer), 3);
  const auto arrays = to_named_arrays(model.params());
  write_checkpoint((dir / "m.avck").string(), arrays);
  const bool ckpt = read_checkpoint((dir / "m.avck").string()) == arrays;
  ok = ok && ckpt;

  std::size_t feat_ok = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto path = (dir / ("f" + std::to_string(i) + ".avwf")).string();
    const FeatureMatrix& f = i % 2 ? *data[i].video : data[i].audio;
    write_features(path, f);
    const FeatureMatrix back = read_features(path);
    if (back.data == f.data && back.rows == f.rows && back.cols == f.cols && back.kind == f.kind &&
        back.frame_shift == f.frame_shift)
      ++feat_ok;
  }
  ok = ok && feat_ok == 4;

  std::vector<Example> subset(data.begin(), data.begin() + 8);
  ModelConfig cfg = ModelConfig::desk(ModelKind::a_transformer);
  TrainConfig s1;
  s1.max_steps = 8;
  s1.warmup_steps = 3;
  s1.batch_size = 4;
  s1.spec_augment = true;
  TrainConfig s2 = s1;
  s2.loss = LossKind::focal;
  s2.max_steps = 4;
  WakeWordModel straight(cfg, 2);
  TrainState full;
  two_stage_train(straight, subset, s1, s2, full);
  std::size_t resumed_ok = 0;
  const long cuts[] = {3, 8, 10};
  for (long cut : cuts) {
    WakeWordModel first(cfg, 2);
    TrainState partial;
    TrainOptions opts;
    opts.step_budget = cut;
    two_stage_train(first, subset, s1, s2, partial, opts);
    write_checkpoint((dir / "state.avck").string(), encode_train_state(first, partial));
    WakeWordModel resumed(cfg, 77);
    TrainState state = decode_train_state(resumed, read_checkpoint((dir / "state.avck").string()));
    two_stage_train(resumed, subset, s1, s2, state);
    if (resumed.params() == straight.params() && state.history == full.history) ++resumed_ok;
  }
  ok = ok && resumed_ok == 3;
  std::filesystem::remove_all(dir);
  detail = std::string("checkpoint ") + (ckpt ? "bit-exact" : "MISMATCH") + "; features " + std::to_string(feat_ok) +
           "/4 bit-exact; resume " + std::to_string(resumed_ok) + "/3 cut points bit-exact";
  return {ok, detail};
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    std::cerr << "running criterion " << id << " (" << name << ")\n";
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
  };
  std::vector<Example> data;
  run(1, "gradient suite", gradient_suite);
  run(2, "metrics oracle", metrics_oracle);
  run(3, "vote truth table", vote_table);
  run(4, "focal/CE reduction", focal_reduction);
  try {
    data = synthetic_set();
  } catch (const std::exception& e) {
    std::cerr << "synthetic set failed: " << e.what() << '\n';
  }
  run(5, "synthetic overfit", [&] { return synthetic_overfit(data); });
  run(6, "AV sanity", [&] { return av_sanity(data); });
  run(7, "ensemble improvement", ensemble_fixture);
  run(8, "DSP properties", dsp_properties);
  run(9, "serialization", [&] { return serialization(data); });
  return failed == 0 ? 0 : 1;
}
