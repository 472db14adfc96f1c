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

#include <filesystem>
#include <string>
#include <vector>

namespace toporeform::acceptance {

struct Outcome {
  int id = 0;
  bool pass = false;
  std::string summary;
  double seconds = 0.0;
};

struct Environment {
  std::filesystem::path cli;
  std::filesystem::path data_dir;
  std::filesystem::path desk_config;
  /// Trained models and reports are cached here between runs.
  std::filesystem::path work_dir;
};

Outcome gradient_correctness();
Outcome persistence_oracle();
Outcome topological_loss_properties();
Outcome attack_contracts();
Outcome mechanism_units();
Outcome robust_io();

/// Criteria 5 to 9 and 11 share the trained desk models.
std::vector<Outcome> desk_criteria(const Environment& env);

}  // namespace toporeform::acceptance
