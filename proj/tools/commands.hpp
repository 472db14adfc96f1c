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

#include <iosfwd>
#include <optional>
#include <string_view>

#include "run_config.hpp"
#include "toporeform/error.hpp"

namespace toporeform::cli {

enum class Command {
  train_classifier,
  train_topoae,
  train_reformer,
  attack,
  evaluate,
  ablate,
  gradcheck,
  export_latents,
};

std::optional<Command> command_from_name(std::string_view name) noexcept;
std::string_view command_name(Command command) noexcept;

/// Exit status of a finished command: 0 success, 1 validation error,
/// 2 runtime failure.
int exit_code_for(ErrorCode code) noexcept;

/// Runs one command. Writes resolved_config.json and appends to run.log in
/// the output directory; human-readable progress goes to `out`. Library
/// errors propagate as toporeform::Error.
void run(Command command, const RunConfig& cfg, std::ostream& out);

}  // namespace toporeform::cli
