// Copyright 2026 The lossq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace lossq {

/// Rejected input: a value violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The data do not support a certified estimate (e.g. a nonpositive
/// denominator after finite-size corrections). Callers must not produce key.
class EstimationFailure : public std::runtime_error {
 public:
  EstimationFailure(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace lossq
