// include/avwws/params.hpp

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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avwws/tensor.hpp"

namespace avwws {

/// Tensors bound to one forward/backward pass. Each graph gets its own
/// binding so that concurrent passes never share gradient buffers.
class Binding {
 public:
  Binding() = default;
  explicit Binding(std::vector<Tensor> tensors) : tensors_(std::move(tensors)) {}

  const Tensor& operator[](std::size_t index) const { return tensors_.at(index); }
  std::size_t size() const { return tensors_.size(); }
  const std::vector<Tensor>& tensors() const { return tensors_; }

 private:
  std::vector<Tensor> tensors_;
};

/// Ordered table of named trainable arrays.
class ParameterSet {
 public:
  std::size_t add(std::string name, Shape shape, std::vector<double> values);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Shape& shape(std::size_t i) const { return shapes_.at(i); }
  std::span<const double> value(std::size_t i) const { return values_.at(i); }
  std::vector<double>& value_mut(std::size_t i) { return values_.at(i); }
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t total_elements() const;

  /// Fresh leaf tensors holding copies of the current values.
  Binding bind(bool requires_grad = true) const;

  bool operator==(const ParameterSet& other) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Shape> shapes_;
  std::vector<std::vector<double>> values_;
};

/// Per-parameter gradients collected from a binding after backward();
/// parameters that received no gradient get zeros.
std::vector<std::vector<double>> collect_gradients(const Binding& binding);

}  // namespace avwws
