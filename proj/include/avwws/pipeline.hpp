// include/avwws/pipeline.hpp

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

// The CLI subcommands as library calls. Every command reads its inputs,
// writes only under `out`, and is deterministic in (inputs, config, seed).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avwws/config.hpp"
#include "avwws/features.hpp"
#include "avwws/manifest.hpp"
#include "avwws/models.hpp"
#include "avwws/synth.hpp"
#include "avwws/training.hpp"

namespace avwws {

struct CommandOptions {
  std::string manifest;
  std::string out;
  Config config;
  std::optional<std::uint64_t> seed;
  // train only
  bool resume = false;
  long stop_after = -1;
};

SyntheticSpec synthetic_spec_from(const Config& cfg, std::uint64_t seed);
FbankOptions fbank_options_from(const Config& cfg);
ModelConfig model_config_from(const Config& cfg, std::size_t audio_dim, std::size_t video_dim);
Config model_config_to_config(const ModelConfig& cfg);
/// Stage-1 (cross-entropy) and stage-2 (focal) settings.
std::pair<TrainConfig, TrainConfig> train_configs_from(const Config& cfg, std::uint64_t seed);

/// Examples of the manifest records, features loaded from disk.
std::vector<Example> load_examples(const std::vector<ManifestRecord>& records, bool need_video);

/// Chain step names accepted by augment.
const std::vector<std::string>& augment_step_names();
/// Stable hexadecimal fingerprint of an augmentation chain and its settings.
std::string chain_fingerprint(const Config& cfg, std::uint64_t seed);

void run_gen_data(const CommandOptions& opts);
void run_featurize(const CommandOptions& opts);
/// Appends augmented copies of the train records; other records pass through.
void run_augment(const CommandOptions& opts);
void run_train(const CommandOptions& opts);
void run_eval(const CommandOptions& opts);
void run_vote(const CommandOptions& opts);

/// Model stored next to a checkpoint: "<stem>.avck" + "<stem>.cfg".
WakeWordModel load_model(const std::string& checkpoint_path);

}  // namespace avwws
