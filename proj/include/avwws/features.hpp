// include/avwws/features.hpp

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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avwws/audio.hpp"

namespace avwws {

enum class FeatureKind : std::uint8_t { audio = 0, video = 1 };

/// Frame-level features, T rows of D values each, row-major.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double frame_shift = 0.01;  // seconds
  FeatureKind kind = FeatureKind::audio;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t t, std::size_t d, double shift, FeatureKind k)
      : rows(t), cols(d), data(t * d, 0.0), frame_shift(shift), kind(k) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  /// Throws InputError when empty, inconsistent or non-finite.
  void validate() const;
};

struct FbankOptions {
  std::size_t n_mels = 63;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double energy_floor = 1e-10;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Mel filterbank geometry for one sample rate. Filters are triangles on the
/// mel scale with n_mels + 2 equally spaced edge points from 0 Hz to Nyquist.
class MelBank {
 public:
  MelBank(std::size_t n_mels, std::size_t fft_size, double sample_rate);

  std::size_t n_mels() const { return n_mels_; }
  std::size_t bins() const { return bins_; }
  /// Peak frequency of filter k in Hz.
  double center_hz(std::size_t k) const;
  std::span<const double> weights() const { return weights_; }

 private:
  std::size_t n_mels_;
  std::size_t bins_;
  double sample_rate_;
  std::size_t fft_size_;
  std::vector<double> weights_;
};

/// Hamming-windowed log mel energies, T = 1 + (N - frame_len) / frame_shift.
/// Throws InputError if the (mono) waveform is shorter than one frame.
FeatureMatrix compute_fbank(const Waveform& w, const FbankOptions& opts = {});

/// Same computation on the serial kernel path; kept for equivalence tests.
FeatureMatrix compute_fbank_serial(const Waveform& w, const FbankOptions& opts = {});

struct CmvnStats {
  std::vector<double> mean;
  std::vector<double> variance;
  std::size_t frame_count = 0;
};

/// Global statistics over every frame of every matrix, accumulated in order.
/// Dimensions whose variance falls below 1e-10 are clamped to 1e-10 with a
/// warning on stderr.
CmvnStats compute_cmvn_stats(std::span<const FeatureMatrix> corpus);
FeatureMatrix apply_cmvn(const FeatureMatrix& f, const CmvnStats& stats);

struct SpecAugmentOptions {
  std::size_t n_time_masks = 2;
  std::size_t max_time_width = 10;
  std::size_t n_freq_masks = 2;
  std::size_t max_freq_width = 8;
};

/// Replaces random time spans and frequency bands with the matrix mean.
/// Widths are drawn uniformly from [0, max_width] and clamped to the matrix.
FeatureMatrix spec_augment(const FeatureMatrix& f, const SpecAugmentOptions& opts, std::mt19937_64& rng);

// Binary feature files: "AVWF", u32 version = 1, u8 kind, u32 T, u32 D,
// f64 frame_shift, T*D f64 values, all little-endian.
std::string encode_features(const FeatureMatrix& f);
FeatureMatrix decode_features(std::span<const char> bytes);
void write_features(const std::string& path, const FeatureMatrix& f);
FeatureMatrix read_features(const std::string& path);
/// read_features that additionally requires kind == video.
FeatureMatrix load_video_features(const std::string& path);

}  // namespace avwws
