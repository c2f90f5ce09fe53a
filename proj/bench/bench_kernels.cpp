// bench/bench_kernels.cpp

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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "avwws/features.hpp"
#include "avwws/kernels.hpp"

namespace {

using avwws::kernels::cplx;

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

struct FbankFixture {
  std::vector<double> signal = noise(16000 * static_cast<std::size_t>(10), 1);
  std::vector<double> window;
  avwws::kernels::FrameLayout layout{400, 160, (16000 * 10 - 400) / 160 + 1};
  avwws::RealFft fft{512};
  avwws::MelBank mel{63, 512, 16000.0};
  std::vector<double> out;

  FbankFixture() : window(400), out(layout.n_frames * 63) {
    for (std::size_t i = 0; i < window.size(); ++i) window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / 399.0);
  }
  avwws::kernels::FilterBank bank() const { return {63, mel.bins(), mel.weights()}; }
};

template <bool Parallel>
void BM_log_mel(benchmark::State& state) {
  FbankFixture f;
  for (auto _ : state) {
    if constexpr (Parallel) {
      avwws::kernels::parallel::log_mel_energies(f.signal, f.window, f.layout, f.fft, f.bank(), 1e-10, f.out);
    } else {
      avwws::kernels::serial::log_mel_energies(f.signal, f.window, f.layout, f.fft, f.bank(), 1e-10, f.out);
    }
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.layout.n_frames));
}

template <bool Parallel>
void BM_convolve(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 2);
  const auto h = noise(2048, 3);
  std::vector<double> out(x.size() + h.size() - 1);
  for (auto _ : state) {
    if constexpr (Parallel) {
      avwws::kernels::parallel::direct_convolve(x, h, out);
    } else {
      avwws::kernels::serial::direct_convolve(x, h, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(x.size() * h.size()));
}

template <bool Parallel>
void BM_wpe(benchmark::State& state) {
  const std::size_t channels = 4, frames = 250, bins = 257;
  const auto re = noise(channels * frames * bins, 4);
  const auto im = noise(channels * frames * bins, 5);
  std::vector<cplx> obs(re.size()), out(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) obs[i] = {re[i], im[i]};
  const avwws::kernels::WpeParams params{10, 3, 3};
  for (auto _ : state) {
    if constexpr (Parallel) {
      avwws::kernels::parallel::wpe(obs, channels, frames, bins, params, out);
    } else {
      avwws::kernels::serial::wpe(obs, channels, frames, bins, params, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_log_mel<false>)->Name("log_mel/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_log_mel<true>)->Name("log_mel/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolve<false>)->Name("direct_convolve/serial")->Arg(16000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolve<true>)->Name("direct_convolve/parallel")->Arg(16000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_wpe<false>)->Name("wpe/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_wpe<true>)->Name("wpe/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
