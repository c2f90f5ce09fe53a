// src/fft.cpp

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

#include "avwws/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <vector>

#include "avwws/error.hpp"

namespace avwws {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw ConfigError("fft size must be at least 2");
  std::vector<double> r(n);
  std::vector<fftw_complex> c(n / 2 + 1);
  std::lock_guard<std::mutex> lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), r.data(), c.data(), flags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c.data(), r.data(), flags);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw DimensionError("RealFft::forward: size mismatch");
  std::vector<double> buf(in.begin(), in.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), buf.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw DimensionError("RealFft::inverse: size mismatch");
  // c2r overwrites its input.
  std::vector<std::complex<double>> buf(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  const double s = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= s;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace avwws
