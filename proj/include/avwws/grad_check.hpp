// include/avwws/grad_check.hpp

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
#include <cstdint>
#include <functional>
#include <vector>

#include "avwws/tensor.hpp"

namespace avwws {

using TensorFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compares reverse-mode gradients of the scalar function `f` against
/// central differences with step `eps` (must lie in [1e-7, 1e-3]).
///
/// The discrepancy for one input is the norm-wise relative error
/// ||analytic - numeric|| / max(||analytic||, ||numeric||); when both norms
/// are below 1e-7 (rounding noise of the central difference) the absolute
/// difference is used instead. Returns the
/// largest discrepancy over all inputs. Only the values of `inputs` are
/// used; `f` receives fresh tensors.
double grad_check(const TensorFn& f, const std::vector<Tensor>& inputs, double eps = 1e-5);

/// Same comparison restricted to at most `max_coordinates` randomly chosen
/// coordinates of each input (all of them when the input is smaller).
double grad_check_sampled(const TensorFn& f, const std::vector<Tensor>& inputs, std::size_t max_coordinates,
                          std::uint64_t seed, double eps = 1e-5);

}  // namespace avwws
