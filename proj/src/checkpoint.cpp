// src/checkpoint.cpp

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

#include "avwws/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avwws/error.hpp"

namespace avwws {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(std::span<const char> bytes, std::size_t& off) {
  if (off + sizeof(T) > bytes.size()) throw FormatError("checkpoint truncated", bytes.size());
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::string encode_checkpoint(const std::vector<NamedArray>& arrays) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    if (numel(a.shape) != a.data.size()) throw DimensionError("checkpoint array " + a.name + " has inconsistent shape");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out += a.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
    for (std::size_t d : a.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    const std::size_t off = out.size();
    out.resize(off + a.data.size() * sizeof(double));
    std::memcpy(out.data() + off, a.data.data(), a.data.size() * sizeof(double));
  }
  return out;
}

std::vector<NamedArray> decode_checkpoint(std::span<const char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad checkpoint magic", 0);
  std::size_t off = 4;
  const auto version = get<std::uint32_t>(bytes, off);
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  const auto count = get<std::uint32_t>(bytes, off);
  std::vector<NamedArray> arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const auto name_len = get<std::uint32_t>(bytes, off);
    if (off + name_len > bytes.size()) throw FormatError("checkpoint truncated in parameter name", bytes.size());
    a.name.assign(bytes.data() + off, name_len);
    off += name_len;
    const auto rank = get<std::uint32_t>(bytes, off);
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(get<std::uint32_t>(bytes, off));
    const std::size_t n = numel(a.shape);
    if (bytes.size() - off < n * sizeof(double)) {
      throw FormatError("checkpoint truncated in data of " + a.name, bytes.size());
    }
    a.data.resize(n);
    std::memcpy(a.data.data(), bytes.data() + off, n * sizeof(double));
    off += n * sizeof(double);
    arrays.push_back(std::move(a));
  }
  if (off != bytes.size()) throw FormatError("trailing bytes after checkpoint", off);
  return arrays;
}

void write_checkpoint(const std::string& path, const std::vector<NamedArray>& arrays) {
  const std::string bytes = encode_checkpoint(arrays);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path);
}

std::vector<NamedArray> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace avwws
