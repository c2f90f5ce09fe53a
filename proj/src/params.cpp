// src/params.cpp

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

#include "avwws/params.hpp"

#include "avwws/error.hpp"

namespace avwws {

std::size_t ParameterSet::add(std::string name, Shape shape, std::vector<double> values) {
  if (find(name)) throw ConfigError("duplicate parameter name " + name);
  if (numel(shape) != values.size()) {
    throw DimensionError("parameter " + name + ": shape " + to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  names_.push_back(std::move(name));
  shapes_.push_back(std::move(shape));
  values_.push_back(std::move(values));
  return names_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Binding ParameterSet::bind(bool requires_grad) const {
  std::vector<Tensor> tensors;
  tensors.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    tensors.push_back(requires_grad ? Tensor::parameter(shapes_[i], values_[i])
                                    : Tensor::constant(shapes_[i], values_[i]));
  }
  return Binding(std::move(tensors));
}

std::vector<std::vector<double>> collect_gradients(const Binding& binding) {
  std::vector<std::vector<double>> grads;
  grads.reserve(binding.size());
  for (const Tensor& t : binding.tensors()) {
    if (t.grad().empty()) {
      grads.emplace_back(t.size(), 0.0);
    } else {
      grads.emplace_back(t.grad().begin(), t.grad().end());
    }
  }
  return grads;
}

}  // namespace avwws
