// src/augment.cpp

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

#include "avwws/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avwws/error.hpp"
#include "avwws/fft.hpp"
#include "avwws/kernels.hpp"

namespace avwws {

namespace {

using cplx = std::complex<double>;

std::vector<double> make_window(std::size_t n, StftWindow kind) {
  std::vector<double> w(n, 1.0);
  if (kind == StftWindow::sqrt_hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)));
    }
  }
  return w;
}

// Constant value of sum_k w^2(n - k hop); throws if it is not constant.
double overlap_add_gain(const std::vector<double>& w, std::size_t hop) {
  const std::size_t n = w.size();
  std::vector<double> acc(hop, 0.0);
  for (std::size_t i = 0; i < n; ++i) acc[i % hop] += w[i] * w[i];
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  if (*lo <= 0.0 || (*hi - *lo) > 1e-9 * *hi) {
    throw ConfigError("STFT window does not overlap-add to a constant at hop " + std::to_string(hop) +
                      " for fft size " + std::to_string(n));
  }
  return *lo;
}

double power(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

// Delays x by `shift` samples (may be fractional) with a linear phase ramp.
std::vector<double> fractional_delay(std::span<const double> x, double shift) {
  const std::size_t guard = static_cast<std::size_t>(std::ceil(std::abs(shift))) + 64;
  const std::size_t n = next_pow2(x.size() + guard);
  const RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  std::vector<cplx> spec(fft.bins());
  fft.forward(buf, spec);
  // n is even; the Nyquist bin must stay real.
  for (std::size_t k = 0; k + 1 < spec.size(); ++k) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) * shift / static_cast<double>(n);
    spec[k] *= std::polar(1.0, phase);
  }
  spec.back() = cplx(spec.back().real() * std::cos(std::numbers::pi * shift), 0.0);
  fft.inverse(spec, buf);
  buf.resize(x.size());
  return buf;
}

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h) {
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const RealFft fft(n);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::copy(x.begin(), x.end(), a.begin());
  std::copy(h.begin(), h.end(), b.begin());
  std::vector<cplx> fa(fft.bins()), fb(fft.bins());
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, a);
  a.resize(out_len);
  return a;
}

double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

void check_inside(const RoomSpec& room, const Vec3& p, const char* what) {
  for (int i = 0; i < 3; ++i) {
    if (!(p[i] > 0.0 && p[i] < room.dimensions[i])) {
      throw InputError(std::string(what) + " lies outside the room");
    }
  }
}

}  // namespace

Spectrogram stft(const Waveform& w, std::size_t fft_size, std::size_t hop, StftWindow window) {
  w.validate();
  if (hop == 0 || hop > fft_size) throw ConfigError("STFT hop must lie in [1, fft_size]");
  const std::vector<double> win = make_window(fft_size, window);
  overlap_add_gain(win, hop);
  const std::size_t pad = fft_size - hop;
  const std::size_t padded = w.num_samples() + 2 * pad;
  Spectrogram s;
  s.channels = w.num_channels();
  s.frames = 1 + (padded - fft_size + hop - 1) / hop;
  s.bins = fft_size / 2 + 1;
  s.fft_size = fft_size;
  s.hop = hop;
  s.length = w.num_samples();
  s.sample_rate = w.sample_rate;
  s.window = window;
  s.data.resize(s.channels * s.frames * s.bins);
  const RealFft fft(fft_size);
  for (std::size_t c = 0; c < s.channels; ++c) {
    std::vector<double> x(s.frames * hop + fft_size, 0.0);
    std::copy(w.channels[c].begin(), w.channels[c].end(), x.begin() + static_cast<long>(pad));
    kernels::parallel::frame_spectra(x, win, {fft_size, hop, s.frames}, fft,
                                     std::span<cplx>(s.data).subspan(c * s.frames * s.bins, s.frames * s.bins));
  }
  return s;
}

Waveform istft(const Spectrogram& s) {
  const std::vector<double> win = make_window(s.fft_size, s.window);
  const double gain = overlap_add_gain(win, s.hop);
  const std::size_t pad = s.fft_size - s.hop;
  const RealFft fft(s.fft_size);
  Waveform w;
  w.sample_rate = s.sample_rate;
  std::vector<double> frame(s.fft_size);
  for (std::size_t c = 0; c < s.channels; ++c) {
    std::vector<double> acc(s.frames * s.hop + s.fft_size, 0.0);
    for (std::size_t t = 0; t < s.frames; ++t) {
      fft.inverse(std::span<const cplx>(s.data).subspan((c * s.frames + t) * s.bins, s.bins), frame);
      for (std::size_t i = 0; i < s.fft_size; ++i) acc[t * s.hop + i] += frame[i] * win[i];
    }
    std::vector<double> out(s.length);
    for (std::size_t i = 0; i < s.length; ++i) out[i] = acc[pad + i] / gain;
    w.channels.push_back(std::move(out));
  }
  return w;
}

Waveform delay_and_sum_beamform(const Waveform& multichannel, const std::vector<Vec3>& mic_positions,
                                double steer_deg) {
  multichannel.validate();
  const std::size_t m = multichannel.num_channels();
  if (m < 2) throw ConfigError("beamforming needs at least two channels");
  if (mic_positions.size() != m) {
    throw ConfigError("array geometry has " + std::to_string(mic_positions.size()) + " microphones for " +
                      std::to_string(m) + " channels");
  }
  const double theta = steer_deg * std::numbers::pi / 180.0;
  const Vec3 u{std::cos(theta), std::sin(theta), 0.0};
  // Relative arrival time of a plane wave from direction u at each mic.
  std::vector<double> arrival(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3& p = mic_positions[i];
    arrival[i] = -(p[0] * u[0] + p[1] * u[1] + p[2] * u[2]) / kSpeedOfSound * multichannel.sample_rate;
  }
  const double latest = *std::max_element(arrival.begin(), arrival.end());
  std::vector<double> out(multichannel.num_samples(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double shift = latest - arrival[i];
    if (std::abs(shift) < 1e-12) {
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += multichannel.channels[i][n];
    } else {
      const std::vector<double> d = fractional_delay(multichannel.channels[i], shift);
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += d[n];
    }
  }
  for (double& v : out) v /= static_cast<double>(m);
  return Waveform::mono(std::move(out), multichannel.sample_rate);
}

Spectrogram wpe_dereverb(const Spectrogram& s, const WpeOptions& opts) {
  if (opts.iterations == 0) return s;
  Spectrogram out = s;
  kernels::parallel::wpe(s.data, s.channels, s.frames, s.bins, {opts.taps, opts.delay, opts.iterations}, out.data);
  return out;
}

Waveform wpe_dereverb(const Waveform& w, const WpeOptions& opts, std::size_t fft_size, std::size_t hop) {
  if (opts.iterations == 0) return w;
  return istft(wpe_dereverb(stft(w, fft_size, hop), opts));
}

double sabine_reflection(const RoomSpec& room) {
  const auto& d = room.dimensions;
  if (!(room.rt60 > 0.0)) throw ConfigError("rt60 must be positive");
  const double volume = d[0] * d[1] * d[2];
  const double surface = 2.0 * (d[0] * d[1] + d[1] * d[2] + d[0] * d[2]);
  const double alpha = 24.0 * std::log(10.0) * volume / (kSpeedOfSound * surface * room.rt60);
  if (alpha > 1.0) {
    throw ConfigError("rt60 " + std::to_string(room.rt60) + " s is too short for this room");
  }
  return std::sqrt(1.0 - alpha);
}

std::vector<ImageSource> image_sources(const RoomSpec& room, std::size_t mic) {
  if (mic >= room.mics.size()) throw ConfigError("microphone index out of range");
  for (double v : room.dimensions) {
    if (!(v > 0.0)) throw ConfigError("room dimensions must be positive");
  }
  if (room.max_reflection_order < 0) throw ConfigError("max_reflection_order must be >= 0");
  check_inside(room, room.source, "source");
  const Vec3& r = room.mics[mic];
  check_inside(room, r, "microphone");
  if (dist(room.source, r) < 1e-9) throw InputError("source coincides with microphone");
  const double beta = sabine_reflection(room);
  const int order = room.max_reflection_order;
  const int nmax = order / 2 + 1;
  std::vector<ImageSource> images;
  for (int nx = -nmax; nx <= nmax; ++nx) {
    for (int ny = -nmax; ny <= nmax; ++ny) {
      for (int nz = -nmax; nz <= nmax; ++nz) {
        for (int q = 0; q < 8; ++q) {
          const int n[3] = {nx, ny, nz};
          ImageSource img;
          for (int i = 0; i < 3; ++i) {
            const int qi = (q >> i) & 1;
            img.position[i] = (1 - 2 * qi) * room.source[i] + 2.0 * n[i] * room.dimensions[i];
            img.order += std::abs(2 * n[i] - qi);
          }
          if (img.order > order) continue;
          img.distance = dist(img.position, r);
          img.gain = std::pow(beta, img.order) / (4.0 * std::numbers::pi * img.distance);
          images.push_back(img);
        }
      }
    }
  }
  std::sort(images.begin(), images.end(), [](const ImageSource& a, const ImageSource& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.order < b.order);
  });
  return images;
}

Waveform simulate_rir(const RoomSpec& room, double sample_rate) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  if (room.mics.empty()) throw ConfigError("room has no microphones");
  Waveform rir;
  rir.sample_rate = sample_rate;
  std::vector<std::vector<ImageSource>> per_mic;
  std::size_t length = 1;
  for (std::size_t m = 0; m < room.mics.size(); ++m) {
    per_mic.push_back(image_sources(room, m));
    for (const ImageSource& img : per_mic.back()) {
      const auto tap = static_cast<std::size_t>(std::lround(img.distance / kSpeedOfSound * sample_rate));
      length = std::max(length, tap + 1);
    }
  }
  for (const auto& images : per_mic) {
    std::vector<double> h(length, 0.0);
    for (const ImageSource& img : images) {
      h[static_cast<std::size_t>(std::lround(img.distance / kSpeedOfSound * sample_rate))] += img.gain;
    }
    rir.channels.push_back(std::move(h));
  }
  return rir;
}

Waveform convolve_rir(const Waveform& w, const Waveform& rir) {
  w.validate();
  rir.validate();
  if (w.sample_rate != rir.sample_rate) throw InputError("signal and RIR sample rates differ");
  const auto x = w.samples();
  Waveform out;
  out.sample_rate = w.sample_rate;
  for (const auto& h : rir.channels) {
    if (x.size() * h.size() <= (1u << 18)) {
      std::vector<double> y(x.size() + h.size() - 1);
      kernels::parallel::direct_convolve(x, h, y);
      out.channels.push_back(std::move(y));
    } else {
      out.channels.push_back(fft_convolve(x, h));
    }
  }
  return out;
}

Waveform speed_perturb(const Waveform& w, double ratio) {
  w.validate();
  if (!(ratio > 0.0)) throw ConfigError("speed ratio must be positive");
  if (ratio == 1.0) return w;
  const std::size_t in_len = w.num_samples();
  const auto out_len = static_cast<std::size_t>(std::lround(static_cast<double>(in_len) / ratio));
  // Windowed-sinc interpolation with cutoff at the lower of the two Nyquist
  // rates (in input-sample units).
  const double cutoff = std::min(1.0, 1.0 / ratio);
  constexpr double kZeroCrossings = 16.0;
  const double half_width = kZeroCrossings / cutoff;
  Waveform out;
  out.sample_rate = w.sample_rate;
  for (const auto& x : w.channels) {
    std::vector<double> y(out_len, 0.0);
    for (std::size_t n = 0; n < out_len; ++n) {
      const double t = static_cast<double>(n) * ratio;
      const long lo = std::max(0L, static_cast<long>(std::ceil(t - half_width)));
      const long hi = std::min(static_cast<long>(in_len) - 1, static_cast<long>(std::floor(t + half_width)));
      double acc = 0.0;
      for (long k = lo; k <= hi; ++k) {
        const double dt = t - static_cast<double>(k);
        const double arg = std::numbers::pi * cutoff * dt;
        const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
        const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * dt / half_width);
        acc += x[static_cast<std::size_t>(k)] * cutoff * sinc * win;
      }
      y[n] = acc;
    }
    out.channels.push_back(std::move(y));
  }
  return out;
}

Waveform mix_noise(const Waveform& clean, const Waveform& noise, double snr_db, std::mt19937_64& rng) {
  clean.validate();
  noise.validate();
  if (!std::isfinite(snr_db)) throw ConfigError("SNR must be finite");
  const auto x = clean.samples();
  const auto n = noise.samples();
  const std::size_t len = x.size();
  std::vector<double> seg(len);
  if (n.size() >= len) {
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n.size() - len)(rng);
    std::copy_n(n.begin() + static_cast<long>(start), len, seg.begin());
  } else {
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n.size() - 1)(rng);
    for (std::size_t i = 0; i < len; ++i) seg[i] = n[(start + i) % n.size()];
  }
  const double pc = power(x);
  const double pn = power(seg);
  if (pc <= 0.0) throw InputError("clean signal has zero power");
  if (pn <= 0.0) throw InputError("noise has zero power");
  const double g = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> y(len);
  for (std::size_t i = 0; i < len; ++i) y[i] = x[i] + g * seg[i];
  return Waveform::mono(std::move(y), clean.sample_rate);
}

Waveform clip_length(const Waveform& w, std::size_t max_samples, std::mt19937_64& rng) {
  if (max_samples == 0) throw ConfigError("clip length must be positive");
  if (w.num_samples() <= max_samples) return w;
  const std::size_t start = std::uniform_int_distribution<std::size_t>(0, w.num_samples() - max_samples)(rng);
  Waveform out;
  out.sample_rate = w.sample_rate;
  for (const auto& c : w.channels) {
    out.channels.emplace_back(c.begin() + static_cast<long>(start),
                              c.begin() + static_cast<long>(start + max_samples));
  }
  return out;
}

}  // namespace avwws
