// include/avwws/kernels.hpp

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

// Hot loops of the DSP front end. Every kernel has a serial reference in
// `serial` and an OpenMP version in `parallel`; both produce bit-identical
// results because each output element is computed by the same sequence of
// operations regardless of how the iteration space is split.

#include <complex>
#include <cstddef>
#include <span>

#include "avwws/fft.hpp"

namespace avwws::kernels {

using cplx = std::complex<double>;

struct FrameLayout {
  std::size_t frame_len;  // samples multiplied by the window
  std::size_t hop;
  std::size_t n_frames;
};

/// Triangular filterbank stored densely as [n_filters x bins].
struct FilterBank {
  std::size_t n_filters;
  std::size_t bins;
  std::span<const double> weights;
};

struct WpeParams {
  std::size_t taps;
  std::size_t delay;
  std::size_t iterations;
};

namespace serial {

/// out[f * bins + k]: FFT bin k of frame f, frame f being
/// signal[f*hop, f*hop + frame_len) times `window`, zero-padded to fft.size().
void frame_spectra(std::span<const double> signal, std::span<const double> window,
                   const FrameLayout& layout, const RealFft& fft, std::span<cplx> out);

/// out[f * n_filters + m] = log(max(sum_k |X_f(k)|^2 bank(m, k), floor)).
void log_mel_energies(std::span<const double> signal, std::span<const double> window,
                      const FrameLayout& layout, const RealFft& fft, const FilterBank& bank,
                      double floor, std::span<double> out);

/// Full linear convolution, out.size() == x.size() + h.size() - 1.
void direct_convolve(std::span<const double> x, std::span<const double> h, std::span<double> out);

/// Weighted prediction error dereverberation. `obs` and `out` are laid out
/// [channel][frame][bin].
void wpe(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
         const WpeParams& params, std::span<cplx> out);

}  // namespace serial

namespace parallel {

void frame_spectra(std::span<const double> signal, std::span<const double> window,
                   const FrameLayout& layout, const RealFft& fft, std::span<cplx> out);
void log_mel_energies(std::span<const double> signal, std::span<const double> window,
                      const FrameLayout& layout, const RealFft& fft, const FilterBank& bank,
                      double floor, std::span<double> out);
void direct_convolve(std::span<const double> x, std::span<const double> h, std::span<double> out);
void wpe(std::span<const cplx> obs, std::size_t channels, std::size_t frames, std::size_t bins,
         const WpeParams& params, std::span<cplx> out);

}  // namespace parallel

}  // namespace avwws::kernels
