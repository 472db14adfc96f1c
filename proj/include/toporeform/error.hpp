// Copyright 2026 The toporeform Authors.
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
#include <string_view>

namespace toporeform {

enum class ErrorCode {
  ShapeMismatch,
  UnsupportedOp,
  NonFinite,
  NotScalarLoss,
  DanglingNode,
  KinkUnavoidable,
  DimensionMismatch,
  StalePairing,
  DimMismatch,
  BatchTooSmall,
  FrozenDependencyMissing,
  LengthMismatch,
  LabelOutOfRange,
  EmptyDataset,
  EmptyMatrix,
  BadMagic,
  TruncatedFile,
  IoError,
  BadWeightFile,
  MissingModel,
  StageMissing,
  ConfigInvalid,
  MissingArtifact,
  InvalidArgument,
  GradCheckFailed,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the typed codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) {
    throw Error(code, message);
  }
}

}  // namespace toporeform
