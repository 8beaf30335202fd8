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

#include "erfc/error.hpp"

namespace emo {

const char *error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedLine: return "malformed-line";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kNonDyadic: return "non-dyadic";
    case ErrorKind::kDuplicateUttId: return "duplicate-utt-id";
    case ErrorKind::kBadTimes: return "bad-times";
    case ErrorKind::kAvdOutOfRange: return "avd-out-of-range";
    case ErrorKind::kUnknownEmotion: return "unknown-emotion";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kDanglingKey: return "dangling-key";
    case ErrorKind::kDuplicateKey: return "duplicate-key";
    case ErrorKind::kMissingFeature: return "missing-feature";
    case ErrorKind::kMissingAvd: return "missing-avd";
    case ErrorKind::kUnknownSession: return "unknown-session";
    case ErrorKind::kNoTestSession: return "no-test-session";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kBadModel: return "bad-model";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace emo
