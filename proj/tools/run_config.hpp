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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toporeform/attacks/attacks.hpp"
#include "toporeform/pipeline/config.hpp"
#include "toporeform/pipeline/inference.hpp"

namespace toporeform::cli {

struct DataPaths {
  std::filesystem::path root;
  std::string train_images = "train-images-idx3-ubyte";
  std::string train_labels = "train-labels-idx1-ubyte";
  std::string test_images = "t10k-images-idx3-ubyte";
  std::string test_labels = "t10k-labels-idx1-ubyte";
  /// 0 keeps every image.
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
};

struct EvalSettings {
  std::vector<pipeline::Stage> stages{std::begin(pipeline::kAllStages), std::end(pipeline::kAllStages)};
  /// Test images attacked; 0 means the whole test split.
  std::size_t limit = 200;
  std::size_t chunk = 100;
  /// Stage targeted by the `attack` command.
  pipeline::Stage attack_stage = pipeline::Stage::warmup;
};

struct GradcheckSettings {
  std::size_t seeds = 50;
  double tolerance = 1e-4;
  double mlp_tolerance = 1e-3;
};

struct RunConfig {
  DataPaths data;
  pipeline::PipelineConfig pipeline;
  std::vector<attacks::AttackConfig> attacks;
  EvalSettings eval;
  GradcheckSettings gradcheck;
  std::filesystem::path output_dir = "runs/default";
  /// Where trained models are read from; empty means output_dir.
  std::filesystem::path models_dir;
  std::uint64_t seed = 0;

  std::filesystem::path model_root() const { return models_dir.empty() ? output_dir : models_dir; }
};

/// Every key with its default value. `data.root` falls back to
/// TOPOREFORM_DATA_DIR, then "data/mnist-desk".
nlohmann::ordered_json default_tree();

/// Overlays `user` onto the defaults. ConfigInvalid on unknown keys or on a
/// value whose JSON type differs from the default's.
nlohmann::ordered_json merge_tree(const nlohmann::json& user);

/// Applies one "dotted.path=value" override. The value is read as JSON when
/// it parses, otherwise as a string. Array elements are addressed by index.
void apply_override(nlohmann::ordered_json& tree, const std::string& assignment);

RunConfig from_tree(const nlohmann::ordered_json& tree);
nlohmann::ordered_json to_tree(const RunConfig& cfg);

/// File -> merged tree -> overrides -> RunConfig, validated.
RunConfig load_run_config(const std::filesystem::path& config_path, const std::vector<std::string>& overrides);

}  // namespace toporeform::cli
