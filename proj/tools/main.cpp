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

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "toporeform/error.hpp"

namespace {

int report(toporeform::ErrorCode code, const std::string& message) {
  std::cerr << "ERROR " << toporeform::error_code_name(code) << ": " << message << '\n';
  return toporeform::cli::exit_code_for(code);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace toporeform;

  CLI::App app{"Topology-preserving adversarial purification toolkit"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;

  std::vector<std::pair<CLI::App*, cli::Command>> subs;
  const std::pair<const char*, const char*> help[] = {
      {"train-classifier", "Train the classifier"},
      {"train-topoae", "Train the topology-preserving autoencoder"},
      {"train-reformer", "Train the three reformer variants"},
      {"attack", "Attack one stage and save the adversarial sets"},
      {"evaluate", "Clean metrics for every configured stage"},
      {"ablate", "Every configured attack against every configured stage"},
      {"gradcheck", "Finite-difference check of every differentiable op"},
      {"export-latents", "Write TopoAE codes of the test split as CSV"},
  };
  for (const auto& [name, text] : help) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override a dotted key, e.g. pipeline.warmup_epochs=3");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Master seed");
    subs.emplace_back(sub, *cli::command_from_name(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCode::ConfigInvalid, e.what());
  }

  cli::Command command{};
  CLI::App* chosen = nullptr;
  for (const auto& [sub, cmd] : subs) {
    if (sub->parsed()) {
      chosen = sub;
      command = cmd;
    }
  }

  try {
    // Flags apply after the file and after --set.
    if (!out_dir.empty()) overrides.push_back("output_dir=" + out_dir);
    if (chosen->count("--seed") > 0) overrides.push_back("seed=" + std::to_string(seed));
    const cli::RunConfig cfg = cli::load_run_config(config_path, overrides);
    cli::run(command, cfg, std::cout);
  } catch (const Error& e) {
    return report(e.code(), e.what());
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
