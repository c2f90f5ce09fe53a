// src/synth.cpp

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

#include "avwws/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "avwws/error.hpp"

namespace avwws {

void SyntheticSpec::validate() const {
  if (n_positive < 1 || n_negative < 1) throw ConfigError("synthetic corpus needs at least one clip per label");
  if (!(sample_rate >= 8000.0)) throw ConfigError("sample_rate must be at least 8000");
  if (!(min_duration >= 2.5 * kToneSeconds) || !(max_duration >= min_duration)) {
    throw ConfigError("duration range must satisfy 0.375 <= min_duration <= max_duration");
  }
  if (video_dim < 8) throw ConfigError("video_dim must be at least 8");
  if (!(video_fps > 0.0)) throw ConfigError("video_fps must be positive");
  if (!(noise_std > 0.0) || !(motif_amplitude >= 0.0)) throw ConfigError("noise_std and motif_amplitude must be positive");
  if (!(dev_fraction >= 0.0) || !(eval_fraction >= 0.0) || dev_fraction + eval_fraction >= 1.0) {
    throw ConfigError("dev_fraction + eval_fraction must lie in [0, 1)");
  }
}

ClipKind negative_kind(std::size_t index) { return index % 2 == 0 ? ClipKind::decoy : ClipKind::noise; }

SyntheticClip synthesize_clip(const SyntheticSpec& spec, ClipKind kind, std::size_t index) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticClip clip;
  clip.kind = kind;
  clip.label = kind == ClipKind::wake ? 1 : 0;
  const double duration = spec.min_duration + (spec.max_duration - spec.min_duration) * unit(rng);
  const auto n = static_cast<std::size_t>(std::lround(duration * spec.sample_rate));
  const double motif_len = 2.0 * kToneSeconds;
  clip.motif_start = (duration - motif_len) * (0.1 + 0.8 * unit(rng));
  const double amp = spec.motif_amplitude * (0.8 + 0.4 * unit(rng));

  std::vector<double> x(n);
  for (double& v : x) v = spec.noise_std * gauss(rng);
  if (kind != ClipKind::noise) {
    const double* tones = kind == ClipKind::wake ? kWakeTones : kDecoyTones;
    const auto start = static_cast<std::size_t>(std::lround(clip.motif_start * spec.sample_rate));
    const auto tone_n = static_cast<std::size_t>(std::lround(kToneSeconds * spec.sample_rate));
    const std::size_t ramp = tone_n / 10;
    for (int part = 0; part < 2; ++part) {
      const double w = 2.0 * std::numbers::pi * tones[part] / spec.sample_rate;
      for (std::size_t i = 0; i < tone_n; ++i) {
        const std::size_t at = start + part * tone_n + i;
        if (at >= n) break;
        double env = 1.0;
        if (i < ramp) env = static_cast<double>(i) / ramp;
        if (i + ramp > tone_n) env = static_cast<double>(tone_n - i) / ramp;
        x[at] += amp * env * std::sin(w * static_cast<double>(i));
      }
    }
  }
  clip.audio = Waveform::mono(std::move(x), spec.sample_rate);

  const auto frames = static_cast<std::size_t>(std::lround(duration * spec.video_fps));
  clip.video = FeatureMatrix(frames, spec.video_dim, 1.0 / spec.video_fps, FeatureKind::video);
  std::vector<double> phase(spec.video_dim);
  for (double& p : phase) p = 2.0 * std::numbers::pi * unit(rng);
  const std::size_t group = spec.video_dim / 4;
  const std::size_t first = kind == ClipKind::wake ? 0 : group;
  for (std::size_t t = 0; t < frames; ++t) {
    const double sec = static_cast<double>(t) / spec.video_fps;
    const double u = (sec - clip.motif_start) / motif_len;
    const double bump = kind != ClipKind::noise && u >= 0.0 && u <= 1.0 ? std::sin(std::numbers::pi * u) : 0.0;
    for (std::size_t d = 0; d < spec.video_dim; ++d) {
      double v = 0.3 * std::sin(0.4 * sec * (1.0 + d) + phase[d]) + 0.2 * gauss(rng);
      if (d >= first && d < first + group) v += 1.5 * bump;
      clip.video.at(t, d) = v;
    }
  }
  return clip;
}

}  // namespace avwws
