// Copyright 2026 The qident Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qident {

/// A precondition of an operation was violated (dimension mismatch,
/// invalid operator, out-of-range parameter).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reasons a protocol cannot produce an estimate from the data it was given.
enum class ProtocolErrorCode {
  kNoConditionedShots,
  kNoPeak,
  kUndefinedBound,
  kInvalidFrame,
  kCoefficientOutOfRange,
  kMissingControl,
  kOverdamped,
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ProtocolErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ProtocolErrorCode code() const noexcept { return code_; }

 private:
  ProtocolErrorCode code_;
};

/// Configuration text could not be turned into a valid run.
/// `field` carries the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace qident
