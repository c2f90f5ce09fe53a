// src/features.cpp

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

#include "avwws/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "avwws/error.hpp"
#include "avwws/fft.hpp"
#include "avwws/kernels.hpp"

namespace avwws {

void FeatureMatrix::validate() const {
  if (rows == 0 || cols == 0) throw InputError("feature matrix is empty");
  if (data.size() != rows * cols) throw InputError("feature matrix data does not match T x D");
  for (double v : data) {
    if (!std::isfinite(v)) throw InputError("feature matrix contains non-finite values");
  }
}

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

MelBank::MelBank(std::size_t n_mels, std::size_t fft_size, double sample_rate)
    : n_mels_(n_mels), bins_(fft_size / 2 + 1), sample_rate_(sample_rate), fft_size_(fft_size) {
  if (n_mels == 0) throw ConfigError("n_mels must be positive");
  weights_.assign(n_mels * bins_, 0.0);
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  const double step = mel_max / static_cast<double>(n_mels + 1);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = step * static_cast<double>(m);
    const double center = step * static_cast<double>(m + 1);
    const double right = step * static_cast<double>(m + 2);
    for (std::size_t k = 0; k < bins_; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / static_cast<double>(fft_size));
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      weights_[m * bins_ + k] = w;
    }
  }
}

double MelBank::center_hz(std::size_t k) const {
  const double step = hz_to_mel(sample_rate_ / 2.0) / static_cast<double>(n_mels_ + 1);
  return mel_to_hz(step * static_cast<double>(k + 1));
}

namespace {

struct FbankSetup {
  kernels::FrameLayout layout;
  std::vector<double> window;
  std::size_t fft_size;
  double frame_shift_s;
};

FbankSetup fbank_setup(const Waveform& w, const FbankOptions& opts) {
  w.validate();
  const auto samples = w.samples();
  const auto frame_len = static_cast<std::size_t>(std::lround(opts.frame_length_ms * 1e-3 * w.sample_rate));
  const auto hop = static_cast<std::size_t>(std::lround(opts.frame_shift_ms * 1e-3 * w.sample_rate));
  if (frame_len == 0 || hop == 0) throw ConfigError("fbank frame length and shift must be positive");
  if (samples.size() < frame_len) {
    throw InputError("waveform of " + std::to_string(samples.size()) + " samples is shorter than one frame (" +
                     std::to_string(frame_len) + ")");
  }
  FbankSetup s;
  s.layout = {frame_len, hop, 1 + (samples.size() - frame_len) / hop};
  s.window.resize(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i) {
    s.window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(frame_len - 1));
  }
  s.fft_size = next_pow2(frame_len);
  s.frame_shift_s = static_cast<double>(hop) / w.sample_rate;
  return s;
}

template <class Kernel>
FeatureMatrix fbank_with(const Waveform& w, const FbankOptions& opts, Kernel kernel) {
  const FbankSetup s = fbank_setup(w, opts);
  const MelBank bank(opts.n_mels, s.fft_size, w.sample_rate);
  const RealFft fft(s.fft_size);
  FeatureMatrix out(s.layout.n_frames, opts.n_mels, s.frame_shift_s, FeatureKind::audio);
  kernel(w.samples(), std::span<const double>(s.window), s.layout, fft,
         kernels::FilterBank{bank.n_mels(), bank.bins(), bank.weights()}, opts.energy_floor,
         std::span<double>(out.data));
  return out;
}

}  // namespace

FeatureMatrix compute_fbank(const Waveform& w, const FbankOptions& opts) {
  return fbank_with(w, opts, [](auto&&... args) { kernels::parallel::log_mel_energies(args...); });
}

FeatureMatrix compute_fbank_serial(const Waveform& w, const FbankOptions& opts) {
  return fbank_with(w, opts, [](auto&&... args) { kernels::serial::log_mel_energies(args...); });
}

CmvnStats compute_cmvn_stats(std::span<const FeatureMatrix> corpus) {
  if (corpus.empty()) throw InputError("CMVN corpus is empty");
  const std::size_t d = corpus[0].cols;
  CmvnStats stats;
  stats.mean.assign(d, 0.0);
  stats.variance.assign(d, 0.0);
  for (const FeatureMatrix& f : corpus) {
    f.validate();
    if (f.cols != d) throw DimensionError("CMVN corpus mixes feature dimensions");
    for (std::size_t r = 0; r < f.rows; ++r) {
      for (std::size_t c = 0; c < d; ++c) stats.mean[c] += f.at(r, c);
    }
    stats.frame_count += f.rows;
  }
  const double n = static_cast<double>(stats.frame_count);
  for (double& m : stats.mean) m /= n;
  // Two-pass variance for accuracy.
  for (const FeatureMatrix& f : corpus) {
    for (std::size_t r = 0; r < f.rows; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = f.at(r, c) - stats.mean[c];
        stats.variance[c] += dev * dev;
      }
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    stats.variance[c] /= n;
    if (stats.variance[c] < 1e-10) {
      std::clog << "warning: CMVN dimension " << c << " has variance " << stats.variance[c]
                << ", clamping to 1e-10\n";
      stats.variance[c] = 1e-10;
    }
  }
  return stats;
}

FeatureMatrix apply_cmvn(const FeatureMatrix& f, const CmvnStats& stats) {
  if (stats.mean.size() != f.cols || stats.variance.size() != f.cols) {
    throw DimensionError("CMVN stats of dimension " + std::to_string(stats.mean.size()) +
                         " applied to features of dimension " + std::to_string(f.cols));
  }
  FeatureMatrix out = f;
  std::vector<double> inv_std(f.cols);
  for (std::size_t c = 0; c < f.cols; ++c) inv_std[c] = 1.0 / std::sqrt(stats.variance[c]);
  for (std::size_t r = 0; r < f.rows; ++r) {
    for (std::size_t c = 0; c < f.cols; ++c) out.at(r, c) = (f.at(r, c) - stats.mean[c]) * inv_std[c];
  }
  return out;
}

FeatureMatrix spec_augment(const FeatureMatrix& f, const SpecAugmentOptions& opts, std::mt19937_64& rng) {
  FeatureMatrix out = f;
  if (opts.n_time_masks == 0 && opts.n_freq_masks == 0) return out;
  double fill = 0.0;
  for (double v : f.data) fill += v;
  fill /= static_cast<double>(f.data.size());

  // Returns [begin, end) of one mask over an axis of length n. A maximum
  // width >= n masks the whole axis.
  auto draw = [&rng](std::size_t n, std::size_t max_width) -> std::pair<std::size_t, std::size_t> {
    if (max_width >= n) return {0, n};
    const std::size_t width = std::uniform_int_distribution<std::size_t>(0, max_width)(rng);
    const std::size_t begin = std::uniform_int_distribution<std::size_t>(0, n - width)(rng);
    return {begin, begin + width};
  };
  for (std::size_t m = 0; m < opts.n_freq_masks; ++m) {
    const auto [b, e] = draw(f.cols, opts.max_freq_width);
    for (std::size_t r = 0; r < f.rows; ++r) {
      for (std::size_t c = b; c < e; ++c) out.at(r, c) = fill;
    }
  }
  for (std::size_t m = 0; m < opts.n_time_masks; ++m) {
    const auto [b, e] = draw(f.rows, opts.max_time_width);
    for (std::size_t r = b; r < e; ++r) {
      for (std::size_t c = 0; c < f.cols; ++c) out.at(r, c) = fill;
    }
  }
  return out;
}

}  // namespace avwws
