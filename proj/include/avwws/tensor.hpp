// include/avwws/tensor.hpp

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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace avwws {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

/// One recorded value in a computation. Ops that take at least one input
/// with requires_grad keep references to their inputs and a closure that
/// pushes `grad` back into them.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major array of doubles with an optional gradient record.
/// Copies are shallow: two Tensor handles may refer to the same node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  /// Empty when no gradient has been accumulated.
  std::span<const double> grad() const;
  bool requires_grad() const;

  double item() const;
  double operator[](std::size_t flat_index) const { return data()[flat_index]; }

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  /// Wraps an existing node. Used by op implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Builds an op result. When none of `inputs` requires a gradient the result
/// is a constant and `backward` is dropped.
Tensor make_op(const char* op, Shape shape, std::vector<double> value,
               std::vector<Tensor> inputs,
               std::function<void(detail::Node&)> backward);

/// Reverse-topological replay record for one scalar loss.
class Graph {
 public:
  /// Collects every node reachable from `loss` that participates in
  /// differentiation, inputs before consumers.
  static Graph trace(const Tensor& loss);

  const std::vector<detail::Node*>& nodes() const { return nodes_; }

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure in
  /// reverse order. Gradients accumulate into existing grad buffers.
  void backward();

 private:
  std::shared_ptr<detail::Node> root_;
  std::vector<detail::Node*> nodes_;
};

/// Populates grad for every requires_grad tensor reachable from `loss`.
/// Throws ContractError if `loss` is not a single-element tensor.
void backward(const Tensor& loss);

}  // namespace avwws
