// include/avwws/config.hpp

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

// Flat "key = value" configuration text. '#' starts a comment, blank lines
// are ignored, keys are unique.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace avwws {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> find(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list; empty entries are dropped.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// "key = value" lines in key order.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

std::string trim(const std::string& s);

}  // namespace avwws
