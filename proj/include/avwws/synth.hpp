// include/avwws/synth.hpp

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

// Synthetic wake-word corpus. Positives carry a fixed two-tone motif in
// noise, negatives are noise alone or a decoy motif at other frequencies.
// Video features are low-dimensional trajectories that bump on a
// label-specific set of dimensions while a motif is sounding.

#include <cstddef>
#include <cstdint>

#include "avwws/audio.hpp"
#include "avwws/features.hpp"

namespace avwws {

struct SyntheticSpec {
  std::size_t n_positive = 16;
  std::size_t n_negative = 16;
  double sample_rate = 16000.0;
  double min_duration = 1.0;
  double max_duration = 1.5;
  std::uint64_t seed = 1;
  std::size_t video_dim = 16;
  double video_fps = 25.0;
  double noise_std = 0.05;
  double motif_amplitude = 0.25;
  double dev_fraction = 0.0;
  double eval_fraction = 0.0;

  void validate() const;
};

constexpr double kWakeTones[2] = {800.0, 1600.0};
constexpr double kDecoyTones[2] = {1100.0, 2300.0};
constexpr double kToneSeconds = 0.15;

enum class ClipKind { wake, decoy, noise };

struct SyntheticClip {
  ClipKind kind = ClipKind::noise;
  int label = 0;
  Waveform audio;
  FeatureMatrix video;
  double motif_start = 0.0;  // seconds; meaningless for ClipKind::noise
};

/// Clip `index` of a corpus; depends only on (spec, kind, index).
SyntheticClip synthesize_clip(const SyntheticSpec& spec, ClipKind kind, std::size_t index);

/// Negative `index` alternates between decoy and noise-only clips.
ClipKind negative_kind(std::size_t index);

}  // namespace avwws
