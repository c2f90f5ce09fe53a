// include/avwws/training.hpp

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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "avwws/checkpoint.hpp"
#include "avwws/features.hpp"
#include "avwws/models.hpp"
#include "avwws/tensor.hpp"

namespace avwws {

enum class LossKind { ce, focal };

struct TrainConfig {
  LossKind loss = LossKind::ce;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
  double lr_peak = 1e-3;
  long warmup_steps = 100;
  std::size_t batch_size = 8;
  long max_steps = 300;
  std::uint64_t seed = 1;
  bool spec_augment = false;
  SpecAugmentOptions spec_augment_options;

  /// lr 1e-5 warmed up over 10,000 steps, batch 32.
  static TrainConfig full_scale(LossKind loss);
  void validate() const;
};

struct Example {
  std::string id;
  FeatureMatrix audio;
  std::optional<FeatureMatrix> video;
  int label = 0;
};

/// Probabilities are clamped to [1e-12, 1 - 1e-12]; the gradient is taken at
/// the clamped value.
constexpr double kProbabilityClamp = 1e-12;

double ce_value(double p, int label);
double focal_value(double p, int label, double gamma, double alpha);

/// Mean binary cross-entropy over p (one probability per label).
Tensor ce_loss(const Tensor& p, std::span<const int> labels);
/// Mean focal loss -alpha_t (1 - p_t)^gamma log p_t.
Tensor focal_loss(const Tensor& p, std::span<const int> labels, double gamma, double alpha);
Tensor loss_for(const TrainConfig& cfg, const Tensor& p, std::span<const int> labels);

/// Linear ramp from 0 to lr_peak over warmup_steps, constant afterwards.
double lr_schedule(long step, const TrainConfig& cfg);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState zeros_like(const ParameterSet& params);
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(ParameterSet& params, const std::vector<std::vector<double>>& grads, AdamState& state, double lr);

struct HistoryRecord {
  long step = 0;
  int stage = 1;
  double loss = 0.0;
  double lr = 0.0;

  bool operator==(const HistoryRecord&) const = default;
};

/// "step stage loss lr" per line, full precision.
void write_history(std::ostream& out, std::span<const HistoryRecord> history);

/// Mini-batch indices for one optimizer step; a pure function of
/// (seed, stage, step) so that interrupted runs can be resumed exactly.
std::vector<std::size_t> sample_batch(std::size_t n_examples, std::size_t batch_size, std::uint64_t seed, int stage,
                                      long step);

/// Loss and summed parameter gradients of one mini-batch. Examples are
/// processed in parallel on independent graphs; gradients are reduced in
/// example order, so the result does not depend on the thread count.
struct BatchGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;
};
BatchGradient batch_gradient(const WakeWordModel& model, std::span<const Example> data,
                             std::span<const std::size_t> batch, const TrainConfig& cfg, int stage, long step);

/// Where a run currently stands. `stage` is 1 or 2 and `step` the number of
/// optimizer steps already taken within that stage.
struct TrainState {
  int stage = 1;
  long step = 0;
  AdamState adam;
  std::vector<HistoryRecord> history;
};

std::vector<NamedArray> encode_train_state(const WakeWordModel& model, const TrainState& state);
TrainState decode_train_state(WakeWordModel& model, const std::vector<NamedArray>& arrays);

struct TrainOptions {
  /// Stop after this many optimizer steps in this call (for checkpointing);
  /// negative means run to completion.
  long step_budget = -1;
  /// Called after every step.
  std::function<void(const HistoryRecord&)> on_step;
};

/// Runs (or continues) cross-entropy training followed by focal-loss
/// fine-tuning of the same data, starting stage 2 from the stage-1
/// parameters with a fresh optimizer state. Throws DivergenceError on a
/// non-finite loss. Returns true when both stages are complete.
bool two_stage_train(WakeWordModel& model, std::span<const Example> data, const TrainConfig& stage1,
                     const TrainConfig& stage2, TrainState& state, const TrainOptions& options = {});

/// Wake probabilities for every example, computed in parallel.
std::vector<double> predict_all(const WakeWordModel& model, std::span<const Example> data);

}  // namespace avwws
