// include/avwws/audio.hpp

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
#include <span>
#include <string>
#include <vector>

namespace avwws {

/// PCM signal, one sample vector per channel, all of equal length.
struct Waveform {
  std::vector<std::vector<double>> channels;
  double sample_rate = 16000.0;

  static Waveform mono(std::vector<double> samples, double sample_rate);

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
  double duration() const { return static_cast<double>(num_samples()) / sample_rate; }

  /// The single channel of a mono waveform; throws InputError otherwise.
  std::span<const double> samples() const;
  std::vector<double>& samples_mut();

  /// Throws InputError on a non-positive rate, ragged channels or
  /// non-finite samples.
  void validate() const;
};

enum class WavEncoding { pcm16, float32 };

Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w, WavEncoding encoding = WavEncoding::pcm16);

}  // namespace avwws
