// include/avwws/fft.hpp

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

#include <complex>
#include <cstddef>
#include <span>

namespace avwws {

/// Real-input FFT of a fixed length. Construction is serialized internally;
/// forward/inverse may be called concurrently from several threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// in: n samples, out: n/2 + 1 bins (unnormalized).
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// in: n/2 + 1 bins, out: n samples, scaled by 1/n so that
  /// inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace avwws
