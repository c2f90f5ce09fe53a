// include/avwws/checkpoint.hpp

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

#include <span>
#include <string>
#include <vector>

#include "avwws/tensor.hpp"

namespace avwws {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> data;

  bool operator==(const NamedArray&) const = default;
};

// Checkpoint files: "AVCK", u32 version = 1, u32 count, then per array
// u32 name length, UTF-8 name, u32 rank, rank x u32 dims, f64 data.
// All integers and floats little-endian.
std::string encode_checkpoint(const std::vector<NamedArray>& arrays);
std::vector<NamedArray> decode_checkpoint(std::span<const char> bytes);
void write_checkpoint(const std::string& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_checkpoint(const std::string& path);

}  // namespace avwws
