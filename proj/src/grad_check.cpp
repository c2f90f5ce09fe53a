// src/grad_check.cpp

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

#include "avwws/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "avwws/error.hpp"

namespace avwws {

namespace {

double eval_scalar(const TensorFn& f, const std::vector<Tensor>& args) {
  Tensor out = f(args);
  if (out.size() != 1) {
    throw ContractError("grad_check: function must return a scalar, got " + to_string(out.shape()));
  }
  return out[0];
}

double check_coordinates(const TensorFn& f, const std::vector<Tensor>& inputs, double eps,
                         const std::vector<std::vector<std::size_t>>& coords) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ContractError("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    leaves.push_back(Tensor::parameter(t.shape(), {t.data().begin(), t.data().end()}));
  }
  Tensor loss = f(leaves);
  backward(loss);

  std::vector<Tensor> probe;
  probe.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    probe.push_back(Tensor::constant(t.shape(), {t.data().begin(), t.data().end()}));
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::vector<double> base(inputs[i].data().begin(), inputs[i].data().end());
    std::vector<double> analytic(base.size(), 0.0);
    if (!leaves[i].grad().empty()) {
      std::copy(leaves[i].grad().begin(), leaves[i].grad().end(), analytic.begin());
    }
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t j : coords[i]) {
      std::vector<double> plus = base, minus = base;
      plus[j] += eps;
      minus[j] -= eps;
      probe[i] = Tensor::constant(inputs[i].shape(), std::move(plus));
      const double fp = eval_scalar(f, probe);
      probe[i] = Tensor::constant(inputs[i].shape(), std::move(minus));
      const double fm = eval_scalar(f, probe);
      const double numeric = (fp - fm) / (2.0 * eps);
      diff2 += (analytic[j] - numeric) * (analytic[j] - numeric);
      a2 += analytic[j] * analytic[j];
      n2 += numeric * numeric;
    }
    probe[i] = Tensor::constant(inputs[i].shape(), base);
    const double denom = std::max(std::sqrt(a2), std::sqrt(n2));
    const double err = denom < 1e-7 ? std::sqrt(diff2) : std::sqrt(diff2) / denom;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

double grad_check(const TensorFn& f, const std::vector<Tensor>& inputs, double eps) {
  std::vector<std::vector<std::size_t>> coords(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    coords[i].resize(inputs[i].size());
    std::iota(coords[i].begin(), coords[i].end(), std::size_t{0});
  }
  return check_coordinates(f, inputs, eps, coords);
}

double grad_check_sampled(const TensorFn& f, const std::vector<Tensor>& inputs, std::size_t max_coordinates,
                          std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> coords(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<std::size_t> all(inputs[i].size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (all.size() > max_coordinates) {
      std::shuffle(all.begin(), all.end(), rng);
      all.resize(max_coordinates);
      std::sort(all.begin(), all.end());
    }
    coords[i] = std::move(all);
  }
  return check_coordinates(f, inputs, eps, coords);
}

}  // namespace avwws
