// src/wav.cpp

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

#include "avwws/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avwws/error.hpp"

namespace avwws {

Waveform Waveform::mono(std::vector<double> samples, double sample_rate) {
  Waveform w;
  w.channels.push_back(std::move(samples));
  w.sample_rate = sample_rate;
  return w;
}

std::span<const double> Waveform::samples() const {
  if (channels.size() != 1) {
    throw InputError("expected a mono waveform, got " + std::to_string(channels.size()) + " channels");
  }
  return channels[0];
}

std::vector<double>& Waveform::samples_mut() {
  if (channels.size() != 1) {
    throw InputError("expected a mono waveform, got " + std::to_string(channels.size()) + " channels");
  }
  return channels[0];
}

void Waveform::validate() const {
  if (!(sample_rate > 0.0)) throw InputError("sample rate must be positive");
  if (channels.empty()) throw InputError("waveform has no channels");
  for (const auto& c : channels) {
    if (c.size() != channels[0].size()) throw InputError("waveform channels differ in length");
    for (double v : c) {
      if (!std::isfinite(v)) throw InputError("waveform contains non-finite samples");
    }
  }
}

namespace {

// RIFF/WAVE is little-endian; this code assumes a little-endian host.
template <class T>
T read_le(const std::vector<char>& buf, std::size_t off) {
  if (off + sizeof(T) > buf.size()) throw FormatError("unexpected end of WAV data", off);
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  return v;
}

template <class T>
void put_le(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path + ": not a RIFF/WAVE file", 0);
  }
  std::uint16_t format = 0, n_channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= buf.size()) {
    const std::string id(buf.data() + off, 4);
    const auto size = read_le<std::uint32_t>(buf, off + 4);
    const std::size_t body = off + 8;
    if (id == "fmt ") {
      format = read_le<std::uint16_t>(buf, body);
      n_channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      if (format == 0xFFFE) format = read_le<std::uint16_t>(buf, body + 24);  // extensible
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk", off);
      if (n_channels == 0 || rate == 0) throw FormatError(path + ": invalid fmt chunk", off);
      const bool pcm16 = format == 1 && bits == 16;
      const bool f32 = format == 3 && bits == 32;
      if (!pcm16 && !f32) throw FormatError(path + ": only 16-bit PCM and 32-bit float supported", off);
      const std::size_t bytes_per = bits / 8;
      const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
      if (avail < size) throw FormatError(path + ": truncated data chunk", buf.size());
      const std::size_t frames = avail / (bytes_per * n_channels);
      Waveform w;
      w.sample_rate = rate;
      w.channels.assign(n_channels, std::vector<double>(frames));
      for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < n_channels; ++c) {
          const std::size_t p = body + (i * n_channels + c) * bytes_per;
          w.channels[c][i] = pcm16 ? read_le<std::int16_t>(buf, p) / 32768.0
                                   : static_cast<double>(read_le<float>(buf, p));
        }
      }
      return w;
    }
    off = body + size + (size & 1);
  }
  throw FormatError(path + ": no data chunk", buf.size());
}

void write_wav(const std::string& path, const Waveform& w, WavEncoding encoding) {
  w.validate();
  const bool pcm16 = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const auto n_channels = static_cast<std::uint16_t>(w.num_channels());
  const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.num_samples() * n_channels * (bits / 8));
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, pcm16 ? 1 : 3);
  put_le<std::uint16_t>(out, n_channels);
  put_le<std::uint32_t>(out, rate);
  put_le<std::uint32_t>(out, rate * n_channels * (bits / 8));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(n_channels * (bits / 8)));
  put_le<std::uint16_t>(out, bits);
  out += "data";
  put_le<std::uint32_t>(out, data_bytes);
  for (std::size_t i = 0; i < w.num_samples(); ++i) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      const double v = w.channels[c][i];
      if (pcm16) {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put_le<std::int16_t>(out, static_cast<std::int16_t>(scaled));
      } else {
        put_le<float>(out, static_cast<float>(v));
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("write failed: " + path);
}

}  // namespace avwws
