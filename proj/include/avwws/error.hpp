// include/avwws/error.hpp

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

#include <stdexcept>
#include <string>

namespace avwws {

/// Base class of every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (too short, silent, misaligned...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. `offset` is the byte offset where parsing failed.
class FormatError : public InputError {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A precondition of an API call was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// FRR or FAR has an empty denominator.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace avwws
