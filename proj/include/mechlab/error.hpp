// Copyright 2026 The mechlab Authors
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

namespace mechlab {

/// Failure classes. The CLI maps kResource to exit code 3 and every other
/// kind to exit code 2.
enum class ErrorKind {
  kInput,                 // malformed or inconsistent input data
  kDimension,             // grid / vector sizes disagree
  kContract,              // precondition of an operation violated by the caller
  kUndefinedRatio,        // approximation ratio with zero mechanism revenue
  kUndefinedConditional,  // conditioning event has probability zero
  kNonRepresentable,      // interim payment cannot be expressed ex post
  kResource,              // size guard, enumeration limit, query budget
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::kInput, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorKind::kDimension, w) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error(ErrorKind::kContract, w) {}
};
struct UndefinedRatioError : Error {
  explicit UndefinedRatioError(const std::string& w) : Error(ErrorKind::kUndefinedRatio, w) {}
};
struct UndefinedConditionalError : Error {
  explicit UndefinedConditionalError(const std::string& w)
      : Error(ErrorKind::kUndefinedConditional, w) {}
};
struct NonRepresentableError : Error {
  explicit NonRepresentableError(const std::string& w)
      : Error(ErrorKind::kNonRepresentable, w) {}
};
/// Size guards and enumeration limits.
struct SizeError : Error {
  explicit SizeError(const std::string& w) : Error(ErrorKind::kResource, w) {}
};
/// Oracle query budget exhausted.
struct BudgetError : Error {
  explicit BudgetError(const std::string& w) : Error(ErrorKind::kResource, w) {}
};

}  // namespace mechlab
