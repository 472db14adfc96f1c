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

#include "toporeform/pipeline/config.hpp"

#include "toporeform/error.hpp"

namespace toporeform::pipeline {

void validate(const PipelineConfig& cfg) {
  require(cfg.batch_size >= 2, ErrorCode::BatchTooSmall, "batch_size must be at least 2");
  require(cfg.warmup_epochs <= cfg.reformer_epochs, ErrorCode::InvalidArgument,
          "warmup_epochs cannot exceed reformer_epochs");
  require(cfg.topoae.lambda >= 0.0 && cfg.weights.reconstruction >= 0.0 && cfg.weights.classification >= 0.0 &&
              cfg.weights.kl >= 0.0,
          ErrorCode::InvalidArgument, "loss weights must be nonnegative");
  require(cfg.lr > 0.0, ErrorCode::InvalidArgument, "learning rate must be positive");
  require(cfg.topoae.latent >= 1 && cfg.reformer.latent >= 1, ErrorCode::InvalidArgument,
          "latent sizes must be positive");
}

}  // namespace toporeform::pipeline
