// src/tensor.cpp

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

#include "avwws/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "avwws/error.hpp"

namespace avwws {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::shared_ptr<detail::Node> new_leaf(Shape shape, std::vector<double> values,
                                       bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape));
  }
  if (numel(shape) != values.size()) {
    throw DimensionError("shape " + to_string(shape) + " needs " + std::to_string(numel(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(new_leaf(std::move(shape), std::move(values), false));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return Tensor(new_leaf(std::move(shape), std::move(values), true));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = numel(shape);
  return Tensor(new_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return Tensor(new_leaf({1}, {v}, requires_grad));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }

std::span<const double> Tensor::grad() const { return node_->grad; }

bool Tensor::requires_grad() const { return node_->requires_grad; }

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

Tensor make_op(const char* op, Shape shape, std::vector<double> value,
               std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  bool needs_grad = false;
  for (const Tensor& t : inputs) needs_grad = needs_grad || t.requires_grad();
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) node->inputs.push_back(t.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Graph Graph::trace(const Tensor& loss) {
  Graph g;
  g.root_ = loss.node_ptr();
  if (!g.root_ || !g.root_->requires_grad) return g;

  // Iterative post-order DFS: a node is emitted after all of its inputs.
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(g.root_.get(), 0);
  visited.insert(g.root_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* in = node->inputs[next++].get();
      if (in->requires_grad && visited.insert(in).second) stack.emplace_back(in, 0);
    } else {
      g.nodes_.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

void Graph::backward() {
  if (nodes_.empty()) return;
  root_->ensure_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    for (auto& in : node->inputs) {
      if (in->requires_grad) in->ensure_grad();
    }
    node->backward(*node);
  }
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got " +
                        (loss.defined() ? to_string(loss.shape()) : std::string("undefined")));
  }
  Graph::trace(loss).backward();
}

}  // namespace avwws
