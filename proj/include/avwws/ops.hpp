// include/avwws/ops.hpp

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
#include <utility>
#include <vector>

#include "avwws/tensor.hpp"

namespace avwws::ops {

// Elementwise. Binary ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// a * s where s is a one-element tensor (a trainable scalar weight).
Tensor scale_by(const Tensor& a, const Tensor& s);
/// Adds a vector along the last axis of x.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
/// x * sigmoid(x)
Tensor swish(const Tensor& x);
/// Splits the last axis into halves [a, b] and returns a * sigmoid(b).
Tensor glu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Linear algebra on rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// x[T x Din] * w[Din x Dout] + b[Dout]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// Numerically stable softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Normalizes over the last axis, then applies gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

/// Valid-padding cross-correlation.
/// x: [T x F x Cin], kernels: [Kt x Kf x Cin x Cout] -> [T' x F' x Cout],
/// T' = (T - Kt) / stride_t + 1, F' = (F - Kf) / stride_f + 1.
Tensor conv2d(const Tensor& x, const Tensor& kernels, std::pair<std::size_t, std::size_t> stride);

/// Per-channel convolution along time with zero "same" padding.
/// x: [T x D], kernel: [K x D] with K odd -> [T x D].
Tensor depthwise_conv1d(const Tensor& x, const Tensor& kernel);

// Shape plumbing.
Tensor reshape(const Tensor& x, Shape shape);
/// Rows [begin, begin + count) along the first axis.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
/// Concatenation along the first axis; trailing dims must match.
Tensor concat_rows(const std::vector<Tensor>& parts);
/// Columns [begin, begin + count) of a rank-2 tensor.
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_cols(const std::vector<Tensor>& parts);
/// out[i] = x[index[i]] along the first axis. Repeated indices accumulate
/// gradient.
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& index);

/// Scaled dot-product attention over `heads` column groups of q, k, v
/// ([T x D] each, D % heads == 0), heads concatenated and projected by
/// w_out [D x D] and b_out [D].
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            const Tensor& w_out, const Tensor& b_out);

}  // namespace avwws::ops
