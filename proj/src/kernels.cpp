// src/kernels.cpp

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

#include "avwws/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "avwws/error.hpp"

namespace avwws::kernels {

namespace {

void one_frame_spectrum(std::span<const double> signal, std::span<const double> window,
                        const FrameLayout& layout, const RealFft& fft, std::size_t f,
                        std::vector<double>& buf, std::span<cplx> out) {
  std::fill(buf.begin(), buf.end(), 0.0);
  const std::size_t start = f * layout.hop;
  for (std::size_t i = 0; i < layout.frame_len; ++i) {
    const std::size_t s = start + i;
    buf[i] = s < signal.size() ? signal[s] * window[i] : 0.0;
  }
  fft.forward(buf, out);
}

void one_frame_log_mel(std::span<const double> signal, std::span<const double> window,
                       const FrameLayout& layout, const RealFft& fft, const FilterBank& bank,
                       double floor, std::size_t f, std::vector<double>& buf,
                       std::vector<cplx>& spec, std::vector<double>& power, std::span<double> out) {
  one_frame_spectrum(signal, window, layout, fft, f, buf, spec);
  for (std::size_t k = 0; k < bank.bins; ++k) power[k] = std::norm(spec[k]);
  for (std::size_t m = 0; m < bank.n_filters; ++m) {
    const double* w = bank.weights.data() + m * bank.bins;
    double e = 0.0;
    for (std::size_t k = 0; k < bank.bins; ++k) e += w[k] * power[k];
    out[m] = std::log(std::max(e, floor));
  }
}

void check_layout(std::span<const double> window, const FrameLayout& layout, const RealFft& fft) {
  if (window.size() != layout.frame_len || layout.frame_len > fft.size()) {
    throw DimensionError("frame kernel: window/frame/fft sizes inconsistent");
  }
}

double convolve_at(std::span<const double> x, std::span<const double> h, std::size_t n) {
  const std::size_t k_lo = n + 1 > h.size() ? n + 1 - h.size() : 0;
  const std::size_t k_hi = std::min(n, x.size() - 1);
  double acc = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) acc += x[k] * h[n - k];
  return acc;
}

using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

// Iterative variance-normalized multichannel linear prediction for one
// frequency bin.
void wpe_bin(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
             const WpeParams& p, std::size_t bin, std::span<cplx> out) {
  auto at = [&](std::size_t d, std::size_t t) { return (d * frames + t) * bins + bin; };
  const std::size_t dim = channels * p.taps;

  // Stacked delayed observation for frame t: [X(t - delay), ..., X(t - delay - taps + 1)].
  auto stacked = [&](std::size_t t, CVector& v) {
    v.setZero();
    for (std::size_t tap = 0; tap < p.taps; ++tap) {
      const long src = static_cast<long>(t) - static_cast<long>(p.delay + tap);
      if (src < 0) continue;
      for (std::size_t d = 0; d < channels; ++d) {
        v(static_cast<Eigen::Index>(tap * channels + d)) = obs[at(d, static_cast<std::size_t>(src))];
      }
    }
  };

  for (std::size_t d = 0; d < channels; ++d) {
    for (std::size_t t = 0; t < frames; ++t) out[at(d, t)] = obs[at(d, t)];
  }
  CVector xt(static_cast<Eigen::Index>(dim));
  for (std::size_t it = 0; it < p.iterations; ++it) {
    CMatrix r = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    CMatrix cross = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(channels));
    for (std::size_t t = p.delay; t < frames; ++t) {
      double lambda = 0.0;
      for (std::size_t d = 0; d < channels; ++d) lambda += std::norm(out[at(d, t)]);
      lambda = std::max(lambda / static_cast<double>(channels), 1e-10);
      stacked(t, xt);
      const double w = 1.0 / lambda;
      r.noalias() += w * (xt * xt.adjoint());
      for (std::size_t d = 0; d < channels; ++d) {
        cross.col(static_cast<Eigen::Index>(d)) += (w * std::conj(obs[at(d, t)])) * xt;
      }
    }
    const double trace = r.diagonal().real().sum();
    if (!(trace > 0.0)) break;
    r.diagonal().array() += 1e-10 * trace;
    const CMatrix g = r.ldlt().solve(cross);
    for (std::size_t t = 0; t < frames; ++t) {
      stacked(t, xt);
      for (std::size_t d = 0; d < channels; ++d) {
        const cplx pred = g.col(static_cast<Eigen::Index>(d)).dot(xt);  // g^H x
        out[at(d, t)] = obs[at(d, t)] - pred;
      }
    }
  }
}

void check_wpe(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
               const WpeParams& p, std::span<cplx> out) {
  if (obs.size() != channels * frames * bins || out.size() != obs.size()) {
    throw DimensionError("wpe: buffer sizes do not match channels x frames x bins");
  }
  if (p.taps == 0 || p.delay == 0) throw ConfigError("wpe: taps and delay must be >= 1");
}

}  // namespace

namespace serial {

void frame_spectra(std::span<const double> signal, std::span<const double> window,
                   const FrameLayout& layout, const RealFft& fft, std::span<cplx> out) {
  check_layout(window, layout, fft);
  std::vector<double> buf(fft.size());
  for (std::size_t f = 0; f < layout.n_frames; ++f) {
    one_frame_spectrum(signal, window, layout, fft, f, buf, out.subspan(f * fft.bins(), fft.bins()));
  }
}

void log_mel_energies(std::span<const double> signal, std::span<const double> window,
                      const FrameLayout& layout, const RealFft& fft, const FilterBank& bank,
                      double floor, std::span<double> out) {
  check_layout(window, layout, fft);
  std::vector<double> buf(fft.size()), power(fft.bins());
  std::vector<cplx> spec(fft.bins());
  for (std::size_t f = 0; f < layout.n_frames; ++f) {
    one_frame_log_mel(signal, window, layout, fft, bank, floor, f, buf, spec, power,
                      out.subspan(f * bank.n_filters, bank.n_filters));
  }
}

void direct_convolve(std::span<const double> x, std::span<const double> h, std::span<double> out) {
  if (x.empty() || h.empty() || out.size() != x.size() + h.size() - 1) {
    throw DimensionError("direct_convolve: output must hold len(x) + len(h) - 1 samples");
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = convolve_at(x, h, n);
}

void wpe(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
         const WpeParams& params, std::span<cplx> out) {
  check_wpe(obs, channels, frames, bins, params, out);
  for (std::size_t b = 0; b < bins; ++b) wpe_bin(obs, channels, frames, bins, params, b, out);
}

}  // namespace serial

namespace parallel {

void frame_spectra(std::span<const double> signal, std::span<const double> window,
                   const FrameLayout& layout, const RealFft& fft, std::span<cplx> out) {
  check_layout(window, layout, fft);
  const long n = static_cast<long>(layout.n_frames);
#pragma omp parallel
  {
    std::vector<double> buf(fft.size());
#pragma omp for schedule(static)
    for (long f = 0; f < n; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      one_frame_spectrum(signal, window, layout, fft, fi, buf, out.subspan(fi * fft.bins(), fft.bins()));
    }
  }
}

void log_mel_energies(std::span<const double> signal, std::span<const double> window,
                      const FrameLayout& layout, const RealFft& fft, const FilterBank& bank,
                      double floor, std::span<double> out) {
  check_layout(window, layout, fft);
  const long n = static_cast<long>(layout.n_frames);
#pragma omp parallel
  {
    std::vector<double> buf(fft.size()), power(fft.bins());
    std::vector<cplx> spec(fft.bins());
#pragma omp for schedule(static)
    for (long f = 0; f < n; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      one_frame_log_mel(signal, window, layout, fft, bank, floor, fi, buf, spec, power,
                        out.subspan(fi * bank.n_filters, bank.n_filters));
    }
  }
}

void direct_convolve(std::span<const double> x, std::span<const double> h, std::span<double> out) {
  if (x.empty() || h.empty() || out.size() != x.size() + h.size() - 1) {
    throw DimensionError("direct_convolve: output must hold len(x) + len(h) - 1 samples");
  }
  const long n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = convolve_at(x, h, static_cast<std::size_t>(i));
}

void wpe(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
         const WpeParams& params, std::span<cplx> out) {
  check_wpe(obs, channels, frames, bins, params, out);
  const long n = static_cast<long>(bins);
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < n; ++b) {
    wpe_bin(obs, channels, frames, bins, params, static_cast<std::size_t>(b), out);
  }
}

}  // namespace parallel

}  // namespace avwws::kernels
