// Copyright (c) 2026 The ERFC Authors
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

namespace emo {

// Classification of input problems. Every ingestion or dataset-build failure
// maps to exactly one of these so callers (and the CLI exit code) can tell a
// bad file from a bad invocation.
enum class ErrorKind {
  kMalformedLine,
  kNonFinite,
  kNonDyadic,
  kDuplicateUttId,
  kBadTimes,
  kAvdOutOfRange,
  kUnknownEmotion,
  kDimensionMismatch,
  kDanglingKey,
  kDuplicateKey,
  kMissingFeature,
  kMissingAvd,
  kUnknownSession,
  kNoTestSession,
  kEmptyInput,
  kBadModel,
  kIo,
};

const char *error_kind_name(ErrorKind kind);

// Bad data. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad invocation: unknown learner spec, out-of-range parameter, etc.
// The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace emo
