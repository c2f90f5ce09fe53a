// src/feature_io.cpp

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

#include <cstring>
#include <fstream>
#include <iterator>

#include "avwws/error.hpp"
#include "avwws/features.hpp"

namespace avwws {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 1 + 4 + 4 + 8;

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(std::span<const char> bytes, std::size_t& off) {
  if (off + sizeof(T) > bytes.size()) throw FormatError("feature file truncated", bytes.size());
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::string encode_features(const FeatureMatrix& f) {
  if (f.data.size() != f.rows * f.cols) throw DimensionError("feature matrix data does not match T x D");
  std::string out;
  out.reserve(kHeaderBytes + f.data.size() * 8);
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.cols));
  put<double>(out, f.frame_shift);
  const std::size_t off = out.size();
  out.resize(off + f.data.size() * sizeof(double));
  std::memcpy(out.data() + off, f.data.data(), f.data.size() * sizeof(double));
  return out;
}

FeatureMatrix decode_features(std::span<const char> bytes) {
  std::size_t off = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad feature file magic", 0);
  }
  off = 4;
  const auto version = get<std::uint32_t>(bytes, off);
  if (version != kVersion) throw FormatError("unsupported feature file version " + std::to_string(version), 4);
  const auto kind = get<std::uint8_t>(bytes, off);
  if (kind > 1) throw FormatError("unknown feature kind " + std::to_string(kind), 8);
  const auto t = get<std::uint32_t>(bytes, off);
  const auto d = get<std::uint32_t>(bytes, off);
  if (t == 0 || d == 0) throw FormatError("feature file declares an empty matrix", 9);
  const auto shift = get<double>(bytes, off);
  const std::size_t n = static_cast<std::size_t>(t) * d;
  if (bytes.size() - off < n * sizeof(double)) {
    throw FormatError("feature file truncated: expected " + std::to_string(n) + " values", bytes.size());
  }
  if (bytes.size() - off > n * sizeof(double)) {
    throw FormatError("trailing bytes after feature data", off + n * sizeof(double));
  }
  FeatureMatrix f(t, d, shift, static_cast<FeatureKind>(kind));
  std::memcpy(f.data.data(), bytes.data() + off, n * sizeof(double));
  return f;
}

void write_features(const std::string& path, const FeatureMatrix& f) {
  const std::string bytes = encode_features(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path);
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_features(bytes);
}

FeatureMatrix load_video_features(const std::string& path) {
  FeatureMatrix f = read_features(path);
  if (f.kind != FeatureKind::video) throw FormatError(path + ": expected video features", 8);
  return f;
}

}  // namespace avwws
