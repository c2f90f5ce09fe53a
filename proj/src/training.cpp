// src/training.cpp

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

#include "avwws/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numeric>
#include <random>

#include "avwws/error.hpp"
#include "avwws/ops.hpp"

namespace avwws {

TrainConfig TrainConfig::full_scale(LossKind loss) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.lr_peak = 1e-5;
  cfg.warmup_steps = 10000;
  cfg.batch_size = 32;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(lr_peak > 0.0)) throw ConfigError("lr_peak must be positive");
  if (!(focal_gamma >= 0.0)) throw ConfigError("focal_gamma must be >= 0");
  if (!(focal_alpha > 0.0 && focal_alpha <= 1.0)) throw ConfigError("focal_alpha must lie in (0, 1]");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
}

namespace {

double clamp_p(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

void check_labels(const Tensor& p, std::span<const int> labels) {
  if (p.size() != labels.size()) {
    throw ContractError("loss: " + std::to_string(p.size()) + " probabilities for " + std::to_string(labels.size()) +
                        " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractError("loss: labels must be 0 or 1");
  }
}

// d focal / d p for one example.
double focal_grad(double p, int label, double gamma, double alpha) {
  const double pc = clamp_p(p);
  const double pt = label == 1 ? pc : 1.0 - pc;
  const double at = label == 1 ? alpha : 1.0 - alpha;
  const double one_minus = 1.0 - pt;
  double d_dpt = -std::pow(one_minus, gamma) / pt;
  if (gamma != 0.0) d_dpt += gamma * std::pow(one_minus, gamma - 1.0) * std::log(pt);
  d_dpt *= at;
  return label == 1 ? d_dpt : -d_dpt;
}

std::mt19937_64 step_rng(std::uint64_t seed, int stage, long step, std::size_t slot) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage), static_cast<std::uint32_t>(step),
                    static_cast<std::uint32_t>(slot)};
  return std::mt19937_64(seq);
}

}  // namespace

double ce_value(double p, int label) {
  const double pc = clamp_p(p);
  return label == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

double focal_value(double p, int label, double gamma, double alpha) {
  const double pc = clamp_p(p);
  const double pt = label == 1 ? pc : 1.0 - pc;
  const double at = label == 1 ? alpha : 1.0 - alpha;
  return -at * std::pow(1.0 - pt, gamma) * std::log(pt);
}

Tensor ce_loss(const Tensor& p, std::span<const int> labels) {
  check_labels(p, labels);
  const std::vector<int> y(labels.begin(), labels.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += ce_value(p[i], y[i]);
  const double n = static_cast<double>(y.size());
  return make_op("ce_loss", {1}, {acc / n}, {p}, [y, n](detail::Node& self) {
    const auto& pv = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double pc = clamp_p(pv[i]);
      g[i] += self.grad[0] * (pc - y[i]) / (pc * (1.0 - pc)) / n;
    }
  });
}

Tensor focal_loss(const Tensor& p, std::span<const int> labels, double gamma, double alpha) {
  check_labels(p, labels);
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  const std::vector<int> y(labels.begin(), labels.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += focal_value(p[i], y[i], gamma, alpha);
  const double n = static_cast<double>(y.size());
  return make_op("focal_loss", {1}, {acc / n}, {p}, [y, n, gamma, alpha](detail::Node& self) {
    const auto& pv = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < y.size(); ++i) g[i] += self.grad[0] * focal_grad(pv[i], y[i], gamma, alpha) / n;
  });
}

Tensor loss_for(const TrainConfig& cfg, const Tensor& p, std::span<const int> labels) {
  return cfg.loss == LossKind::ce ? ce_loss(p, labels) : focal_loss(p, labels, cfg.focal_gamma, cfg.focal_alpha);
}

double lr_schedule(long step, const TrainConfig& cfg) {
  if (step < 1) throw ContractError("lr_schedule: step must be >= 1");
  if (cfg.warmup_steps <= 0 || step >= cfg.warmup_steps) return cfg.lr_peak;
  return cfg.lr_peak * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
}

AdamState AdamState::zeros_like(const ParameterSet& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params.value(i).size(), 0.0);
    s.v.emplace_back(params.value(i).size(), 0.0);
  }
  return s;
}

void adam_step(ParameterSet& params, const std::vector<std::vector<double>>& grads, AdamState& state, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adam_step: gradient/state count does not match parameters");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params.value_mut(i);
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    if (g.size() != w.size() || m.size() != w.size() || v.size() != w.size()) {
      throw ContractError("adam_step: shape mismatch for parameter " + params.name(i));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g[j];
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }
}

void write_history(std::ostream& out, std::span<const HistoryRecord> history) {
  const auto old = out.precision(17);
  for (const HistoryRecord& r : history) out << r.step << ' ' << r.stage << ' ' << r.loss << ' ' << r.lr << '\n';
  out.precision(old);
}

std::vector<std::size_t> sample_batch(std::size_t n_examples, std::size_t batch_size, std::uint64_t seed, int stage,
                                      long step) {
  if (n_examples == 0) throw InputError("training set is empty");
  std::vector<std::size_t> idx(n_examples);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (batch_size >= n_examples) return idx;
  auto rng = step_rng(seed, stage, step, 0xba7c4);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n_examples - 1)(rng);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(batch_size);
  return idx;
}

BatchGradient batch_gradient(const WakeWordModel& model, std::span<const Example> data,
                             std::span<const std::size_t> batch, const TrainConfig& cfg, int stage, long step) {
  const std::size_t n = batch.size();
  std::vector<std::vector<std::vector<double>>> per_example(n);
  std::vector<double> losses(n, 0.0);
  std::exception_ptr failure;
  const double inv_n = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(dynamic)
  for (long li = 0; li < static_cast<long>(n); ++li) {
    const auto i = static_cast<std::size_t>(li);
    try {
      const Example& ex = data[batch[i]];
      const int label[1] = {ex.label};
      FeatureMatrix audio;
      if (cfg.spec_augment) {
        auto rng = step_rng(cfg.seed, stage, step, i + 1);
        audio = spec_augment(ex.audio, cfg.spec_augment_options, rng);
      }
      const Binding b = model.params().bind(true);
      const Tensor p = model.forward(b, cfg.spec_augment ? audio : ex.audio, ex.video ? &*ex.video : nullptr);
      const Tensor loss = loss_for(cfg, p, label);
      backward(ops::scale(loss, inv_n));
      losses[i] = loss.item();
      per_example[i] = collect_gradients(b);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  BatchGradient out;
  out.grads = std::move(per_example[0]);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < out.grads.size(); ++k) {
      auto& acc = out.grads[k];
      const auto& g = per_example[i][k];
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
    }
  }
  for (double l : losses) out.loss += l;
  out.loss *= inv_n;
  return out;
}

std::vector<NamedArray> encode_train_state(const WakeWordModel& model, const TrainState& state) {
  std::vector<NamedArray> arrays = to_named_arrays(model.params());
  arrays.push_back({"train.stage", {1}, {static_cast<double>(state.stage)}});
  arrays.push_back({"train.step", {1}, {static_cast<double>(state.step)}});
  arrays.push_back({"adam.step", {1}, {static_cast<double>(state.adam.step)}});
  const ParameterSet& params = model.params();
  for (std::size_t i = 0; i < params.size() && i < state.adam.m.size(); ++i) {
    arrays.push_back({"adam.m." + params.name(i), params.shape(i), state.adam.m[i]});
    arrays.push_back({"adam.v." + params.name(i), params.shape(i), state.adam.v[i]});
  }
  NamedArray hist{"train.history", {state.history.size(), 4}, {}};
  for (const HistoryRecord& r : state.history) {
    hist.data.insert(hist.data.end(), {static_cast<double>(r.step), static_cast<double>(r.stage), r.loss, r.lr});
  }
  arrays.push_back(std::move(hist));
  return arrays;
}

TrainState decode_train_state(WakeWordModel& model, const std::vector<NamedArray>& arrays) {
  load_named_arrays(model.params(), arrays);
  auto find = [&](const std::string& name) -> const NamedArray& {
    for (const NamedArray& a : arrays) {
      if (a.name == name) return a;
    }
    throw FormatError("training state lacks " + name, 0);
  };
  TrainState state;
  state.stage = static_cast<int>(find("train.stage").data.at(0));
  state.step = static_cast<long>(find("train.step").data.at(0));
  state.adam.step = static_cast<long>(find("adam.step").data.at(0));
  const ParameterSet& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.adam.m.push_back(find("adam.m." + params.name(i)).data);
    state.adam.v.push_back(find("adam.v." + params.name(i)).data);
  }
  const NamedArray& hist = find("train.history");
  for (std::size_t r = 0; r + 3 < hist.data.size(); r += 4) {
    state.history.push_back({static_cast<long>(hist.data[r]), static_cast<int>(hist.data[r + 1]), hist.data[r + 2],
                             hist.data[r + 3]});
  }
  return state;
}

bool two_stage_train(WakeWordModel& model, std::span<const Example> data, const TrainConfig& stage1,
                     const TrainConfig& stage2, TrainState& state, const TrainOptions& options) {
  stage1.validate();
  stage2.validate();
  if (stage1.loss != LossKind::ce) throw ConfigError("stage 1 must train with cross-entropy");
  if (stage2.loss != LossKind::focal) throw ConfigError("stage 2 must train with focal loss");
  if (data.empty()) throw InputError("training set is empty");
  for (const Example& ex : data) {
    if (model.config().uses_video() && !ex.video) {
      throw ConfigError("example " + ex.id + " has no video features but the model needs them");
    }
  }
  if (state.adam.m.empty()) state.adam = AdamState::zeros_like(model.params());
  long executed = 0;
  while (true) {
    const TrainConfig& cfg = state.stage == 1 ? stage1 : stage2;
    if (state.step >= cfg.max_steps) {
      if (state.stage == 2) return true;
      state.stage = 2;
      state.step = 0;
      state.adam = AdamState::zeros_like(model.params());
      continue;
    }
    if (options.step_budget >= 0 && executed >= options.step_budget) return false;
    const long step = state.step + 1;
    const auto batch = sample_batch(data.size(), cfg.batch_size, cfg.seed, state.stage, step);
    const BatchGradient bg = batch_gradient(model, data, batch, cfg, state.stage, step);
    if (!std::isfinite(bg.loss)) throw DivergenceError("non-finite training loss in stage " + std::to_string(state.stage), step);
    const double lr = lr_schedule(step, cfg);
    adam_step(model.params(), bg.grads, state.adam, lr);
    state.step = step;
    state.history.push_back({step, state.stage, bg.loss, lr});
    if (options.on_step) options.on_step(state.history.back());
    ++executed;
  }
}

std::vector<double> predict_all(const WakeWordModel& model, std::span<const Example> data) {
  std::vector<double> out(data.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long li = 0; li < static_cast<long>(data.size()); ++li) {
    const auto i = static_cast<std::size_t>(li);
    try {
      const Example& ex = data[i];
      out[i] = model.predict(ex.audio, ex.video ? &*ex.video : nullptr);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace avwws
