// include/avwws/augment.hpp

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

#include <array>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include "avwws/audio.hpp"

namespace avwws {

using Vec3 = std::array<double, 3>;

constexpr double kSpeedOfSound = 343.0;

enum class StftWindow { sqrt_hann, rectangular };

/// Complex STFT of every channel, laid out [channel][frame][bin].
/// The signal is zero-padded by fft_size - hop samples on both sides so that
/// every original sample is covered by the full overlap-add sum.
struct Spectrogram {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t fft_size = 0;
  std::size_t hop = 0;
  std::size_t length = 0;  // original samples per channel
  double sample_rate = 16000.0;
  StftWindow window = StftWindow::sqrt_hann;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t c, std::size_t t, std::size_t k) {
    return data[(c * frames + t) * bins + k];
  }
  const std::complex<double>& at(std::size_t c, std::size_t t, std::size_t k) const {
    return data[(c * frames + t) * bins + k];
  }
};

/// Throws ConfigError unless the squared window overlap-adds to a constant
/// at the given hop.
Spectrogram stft(const Waveform& w, std::size_t fft_size, std::size_t hop,
                 StftWindow window = StftWindow::sqrt_hann);
Waveform istft(const Spectrogram& s);

/// Fixed delay-and-sum beamformer steered to `steer_deg` in the x-y plane
/// (90 degrees is broadside to an array laid out along x). Channels are
/// aligned with fractional delays and averaged.
Waveform delay_and_sum_beamform(const Waveform& multichannel, const std::vector<Vec3>& mic_positions,
                                double steer_deg = 90.0);

struct WpeOptions {
  std::size_t taps = 10;
  std::size_t delay = 3;
  std::size_t iterations = 3;
};

Spectrogram wpe_dereverb(const Spectrogram& s, const WpeOptions& opts = {});
/// STFT -> WPE -> inverse STFT.
Waveform wpe_dereverb(const Waveform& w, const WpeOptions& opts = {}, std::size_t fft_size = 512,
                      std::size_t hop = 128);

struct RoomSpec {
  Vec3 dimensions{};
  Vec3 source{};
  std::vector<Vec3> mics;
  double rt60 = 0.3;
  int max_reflection_order = 10;
};

struct ImageSource {
  Vec3 position{};
  int order = 0;
  double distance = 0.0;
  double gain = 0.0;  // beta^order / (4 pi distance)
};

/// Frequency-independent wall reflection coefficient from Sabine's formula.
double sabine_reflection(const RoomSpec& room);

/// Image sources of order <= room.max_reflection_order seen from mic `mic`,
/// sorted by arrival distance.
std::vector<ImageSource> image_sources(const RoomSpec& room, std::size_t mic);

/// One impulse-response channel per microphone. Each image contributes one
/// tap at the nearest sample to distance / c.
Waveform simulate_rir(const RoomSpec& room, double sample_rate);

/// Full linear convolution of a mono signal with every channel of `rir`.
Waveform convolve_rir(const Waveform& w, const Waveform& rir);

/// Resamples so that the output has round(len / ratio) samples at the same
/// sample rate (tempo and pitch both scale by ratio).
Waveform speed_perturb(const Waveform& w, double ratio);

/// clean + noise scaled to the requested SNR. Longer noise is randomly
/// cropped, shorter noise is tiled from a random offset.
Waveform mix_noise(const Waveform& clean, const Waveform& noise, double snr_db, std::mt19937_64& rng);

/// Randomly crops signals longer than `max_samples`; shorter ones are
/// returned unchanged.
Waveform clip_length(const Waveform& w, std::size_t max_samples, std::mt19937_64& rng);

}  // namespace avwws
