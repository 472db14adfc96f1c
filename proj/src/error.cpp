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

#include "toporeform/error.hpp"

namespace toporeform {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnsupportedOp: return "UnsupportedOp";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::DanglingNode: return "DanglingNode";
    case ErrorCode::KinkUnavoidable: return "KinkUnavoidable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StalePairing: return "StalePairing";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::FrozenDependencyMissing: return "FrozenDependencyMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadWeightFile: return "BadWeightFile";
    case ErrorCode::MissingModel: return "MissingModel";
    case ErrorCode::StageMissing: return "StageMissing";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GradCheckFailed: return "GradCheckFailed";
  }
  return "Unknown";
}

}  // namespace toporeform
