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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "toporeform/autodiff/gradcheck.hpp"
#include "toporeform/dataio/export.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/weight_file.hpp"
#include "toporeform/pipeline/evaluation.hpp"
#include "toporeform/pipeline/training.hpp"
#include "toporeform/random.hpp"

namespace toporeform::cli {

namespace fs = std::filesystem;

namespace {

constexpr struct {
  Command command;
  std::string_view name;
} kCommands[] = {
    {Command::train_classifier, "train-classifier"},
    {Command::train_topoae, "train-topoae"},
    {Command::train_reformer, "train-reformer"},
    {Command::attack, "attack"},
    {Command::evaluate, "evaluate"},
    {Command::ablate, "ablate"},
    {Command::gradcheck, "gradcheck"},
    {Command::export_latents, "export-latents"},
};

constexpr std::string_view kClassifierFile = "classifier.trfm";
constexpr std::string_view kTopoAEFile = "topoae.trfm";
constexpr std::string_view kReformerPlainFile = "reformer_plain.trfm";
constexpr std::string_view kReformerAuxFile = "reformer_aux.trfm";
constexpr std::string_view kReformerWarmupFile = "reformer_warmup.trfm";

// Timestamps are confined to this file so every other output is
// reproducible byte for byte.
class RunLog {
 public:
  explicit RunLog(const fs::path& dir) : out_(dir / "run.log", std::ios::app) {}

  void line(const std::string& text) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    out_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << text << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_history(const fs::path& path, const pipeline::TrainHistory& history) {
  auto out = open_out(path);
  history.write_csv(out);
}

dataio::Dataset take_first(const dataio::Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  std::vector<std::size_t> idx(limit);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return data.subset(idx);
}

dataio::Dataset load_split(const RunConfig& cfg, bool train) {
  const auto& d = cfg.data;
  dataio::IdxOptions opts;
  opts.class_count = cfg.pipeline.classifier.classes;
  auto data = train ? dataio::load_idx(d.root / d.train_images, d.root / d.train_labels, opts)
                    : dataio::load_idx(d.root / d.test_images, d.root / d.test_labels, opts);
  return take_first(data, train ? d.train_limit : d.test_limit);
}

fs::path artifact(const RunConfig& cfg, std::string_view name, std::string_view needed_by) {
  fs::path path = cfg.model_root() / name;
  require(fs::exists(path), ErrorCode::MissingArtifact,
          path.string() + " not found; run " + std::string(needed_by) + " first");
  return path;
}

models::ClassifierModel load_classifier(const RunConfig& cfg) {
  models::ClassifierModel model(cfg.pipeline.classifier, 0);
  auto params = model.parameters();
  models::load_parameters(artifact(cfg, kClassifierFile, "train-classifier"), params);
  models::set_frozen(params, true);
  return model;
}

models::TopoAEModel load_topoae(const RunConfig& cfg) {
  models::TopoAEModel model(cfg.pipeline.topoae, 0);
  auto params = model.parameters();
  models::load_parameters(artifact(cfg, kTopoAEFile, "train-topoae"), params);
  models::set_frozen(params, true);
  return model;
}

struct ReformerPair {
  models::ReformerVAE vae;
  std::optional<models::AuxModule> aux;
};

ReformerPair load_reformer(const RunConfig& cfg, std::string_view file, bool with_aux) {
  ReformerPair pair{models::ReformerVAE(cfg.pipeline.reformer, 0), std::nullopt};
  auto params = pair.vae.parameters();
  if (with_aux) {
    pair.aux.emplace(cfg.pipeline.aux_spec(), 0);
    const auto aux = pair.aux->parameters();
    params.insert(params.end(), aux.begin(), aux.end());
  }
  models::load_parameters(artifact(cfg, file, "train-reformer"), params);
  models::set_frozen(params, true);
  return pair;
}

void save_reformer(const fs::path& path, const pipeline::ReformerRun& run) {
  std::vector<const Parameter*> params = run.vae.parameters();
  if (run.aux) {
    auto aux = run.aux->parameters();
    params.insert(params.end(), aux.begin(), aux.end());
  }
  models::save_parameters(path, params);
}

// Loads only what the requested stages need.
pipeline::StageModels load_stage_models(const RunConfig& cfg, std::span<const pipeline::Stage> stages) {
  using pipeline::Stage;
  auto needs = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  pipeline::StageModels m;
  m.classifier = load_classifier(cfg);
  if (needs(Stage::topoae) || needs(Stage::reformer) || needs(Stage::aux) || needs(Stage::warmup)) {
    m.topoae = load_topoae(cfg);
  }
  if (needs(Stage::reformer)) {
    m.plain_vae = load_reformer(cfg, kReformerPlainFile, false).vae;
  }
  if (needs(Stage::aux)) {
    auto pair = load_reformer(cfg, kReformerAuxFile, true);
    m.aux_vae = std::move(pair.vae);
    m.aux_module = std::move(pair.aux);
  }
  if (needs(Stage::warmup)) {
    auto pair = load_reformer(cfg, kReformerWarmupFile, true);
    m.warmup_vae = std::move(pair.vae);
    m.warmup_aux = std::move(pair.aux);
  }
  return m;
}

pipeline::EvalOptions eval_options(const RunConfig& cfg) {
  pipeline::EvalOptions opts;
  opts.seed = cfg.seed;
  opts.chunk = cfg.eval.chunk;
  if (cfg.pipeline.inference_noise == pipeline::InferenceNoise::sample) {
    opts.noise = attacks::NoiseDraw{true, derive_seed(cfg.seed, 0x696e666572), 0};
  }
  return opts;
}

void write_report(const fs::path& dir, std::string_view stem, const pipeline::EvalReport& report, std::ostream& out) {
  write_json(dir / (std::string(stem) + ".json"), report.to_json());
  auto csv = open_out(dir / (std::string(stem) + ".csv"));
  report.write_csv(csv);
  for (const auto& stage : report.stages) {
    for (const auto& row : stage.attacks) {
      out << std::left << std::setw(12) << stage.name << ' ' << std::setw(13) << attacks::attack_name(row.attack.kind)
          << " eps=" << row.attack.epsilon << " c=" << row.attack.c << std::fixed << std::setprecision(4)
          << "  acc=" << row.accuracy << " f1=" << row.f1_macro << " prec=" << row.precision_macro
          << " asr=" << row.asr << std::defaultfloat << std::setprecision(6) << '\n';
    }
  }
}

void train_classifier_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto data = load_split(cfg, true);
  auto run = pipeline::train_classifier(data, cfg.pipeline);
  const fs::path dir = cfg.output_dir;
  models::save_parameters(dir / kClassifierFile, std::as_const(run.model).parameters());
  write_history(dir / "classifier_history.csv", run.history);
  const auto test = load_split(cfg, false);
  const auto pred = pipeline::predict(test.images, pipeline::ModelBundle{run.model, {}, {}, {}});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i];
  out << "classifier test accuracy " << std::fixed << std::setprecision(4)
      << static_cast<double>(correct) / static_cast<double>(pred.size()) << std::defaultfloat << '\n';
}

void train_topoae_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto data = load_split(cfg, true);
  auto run = pipeline::train_topoae(data, cfg.pipeline);
  models::save_parameters(cfg.output_dir / kTopoAEFile, std::as_const(run.model).parameters());
  write_history(cfg.output_dir / "topoae_history.csv", run.history);
  const auto& last = run.history.records.back();
  out << "topoae final loss " << last.total << '\n';
}

// The three reformer variants behind the ablation stages: no auxiliary
// input, auxiliary input without warmup, auxiliary input with warmup.
void train_reformer_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto classifier = load_classifier(cfg);
  const auto topoae = load_topoae(cfg);
  const auto data = load_split(cfg, true);
  struct Variant {
    std::string_view file, history, label;
    bool use_aux;
    std::size_t warmup;
  };
  const Variant variants[] = {
      {kReformerPlainFile, "reformer_plain_history.csv", "plain", false, 0},
      {kReformerAuxFile, "reformer_aux_history.csv", "aux", true, 0},
      {kReformerWarmupFile, "reformer_warmup_history.csv", "warmup", true, cfg.pipeline.warmup_epochs},
  };
  for (const auto& v : variants) {
    pipeline::ReformerOptions opts;
    opts.use_aux = v.use_aux;
    opts.warmup_epochs = v.warmup;
    auto run = pipeline::train_reformer_freezeflow(data, topoae, classifier, cfg.pipeline, opts);
    save_reformer(cfg.output_dir / v.file, run);
    write_history(cfg.output_dir / v.history, run.history);
    out << "reformer " << v.label << " final loss " << run.history.records.back().total << '\n';
  }
}

pipeline::EvalReport evaluate_stages(const RunConfig& cfg, std::span<const pipeline::Stage> stages,
                                     std::span<const attacks::AttackConfig> attack_list) {
  const auto models = load_stage_models(cfg, stages);
  const auto test = take_first(load_split(cfg, false), cfg.eval.limit);
  return pipeline::ablation_run(test, attack_list, models, stages, eval_options(cfg));
}

attacks::AttackConfig null_attack(const RunConfig& cfg) {
  attacks::AttackConfig a;
  a.kind = attacks::AttackKind::fgsm;
  a.epsilon = 0.0;
  a.seed = cfg.seed;
  return a;
}

void evaluate_cmd(const RunConfig& cfg, std::ostream& out) {
  const attacks::AttackConfig clean[] = {null_attack(cfg)};
  write_report(cfg.output_dir, "evaluation", evaluate_stages(cfg, cfg.eval.stages, clean), out);
}

void ablate_cmd(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.attacks.empty(), ErrorCode::ConfigInvalid, "attacks: at least one attack is required");
  write_report(cfg.output_dir, "ablation", evaluate_stages(cfg, cfg.eval.stages, cfg.attacks), out);
}

void attack_cmd(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.attacks.empty(), ErrorCode::ConfigInvalid, "attacks: at least one attack is required");
  const pipeline::Stage stage = cfg.eval.attack_stage;
  const pipeline::Stage stages[] = {stage};
  const auto models = load_stage_models(cfg, stages);
  const auto test = take_first(load_split(cfg, false), cfg.eval.limit);
  const auto opts = eval_options(cfg);
  const auto target = pipeline::stage_target(models, stage, opts.noise);

  pipeline::EvalReport report;
  report.dataset = opts.dataset;
  report.seed = opts.seed;
  report.stages.push_back({std::string(pipeline::stage_name(stage)), {}});
  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
    attacks::AttackResult adv;
    report.stages.back().attacks.push_back(pipeline::evaluate_attack(target, test, cfg.attacks[i], opts, &adv));
    const std::string stem = "adversarial_" + std::to_string(i) + "_" + std::string(attacks::attack_name(cfg.attacks[i].kind));
    attacks::save_adversarial(cfg.output_dir / (stem + ".trfm"), adv, cfg.attacks[i]);
  }
  write_report(cfg.output_dir, "attack", report, out);
}

void gradcheck_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto& g = cfg.gradcheck;
  auto csv = open_out(cfg.output_dir / "gradcheck.csv");
  csv << "check,max_error,tolerance\n";
  csv << std::setprecision(17);
  bool ok = true;
  std::string worst_label;
  auto record = [&](const std::string& label, double worst, double tol) {
    csv << label << ',' << worst << ',' << tol << '\n';
    out << std::left << std::setw(26) << label << std::scientific << std::setprecision(3) << worst
        << (worst < tol ? "  ok" : "  FAIL") << std::defaultfloat << std::setprecision(6) << '\n';
    if (!(worst < tol)) {
      ok = false;
      if (worst_label.empty()) worst_label = label;
    }
  };
  for (const auto& c : standard_op_cases()) {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < g.seeds; ++s) {
      worst = std::max(worst, finite_diff_check(c.kind, c.shapes, derive_seed(cfg.seed, s), c.attrs));
    }
    record(c.label, worst, g.tolerance);
  }
  double mlp = 0.0;
  for (std::uint64_t s = 0; s < std::max<std::size_t>(g.seeds / 10, 1); ++s) {
    mlp = std::max(mlp, mlp_gradient_check(derive_seed(cfg.seed, s)));
  }
  record("mlp", mlp, g.mlp_tolerance);
  csv.close();
  require(ok, ErrorCode::GradCheckFailed, "gradient check exceeded tolerance for " + worst_label);
}

void export_latents_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto topoae = load_topoae(cfg);
  const auto test = load_split(cfg, false);
  const auto rows = dataio::export_latents(topoae, test, cfg.output_dir / "latents.csv");
  out << "wrote " << rows << " latent rows\n";
}

}  // namespace

std::optional<Command> command_from_name(std::string_view name) noexcept {
  for (const auto& c : kCommands) {
    if (c.name == name) return c.command;
  }
  return std::nullopt;
}

std::string_view command_name(Command command) noexcept {
  for (const auto& c : kCommands) {
    if (c.command == command) return c.name;
  }
  return "";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BatchTooSmall:
      return 1;
    default:
      return 2;
  }
}

void run(Command command, const RunConfig& cfg, std::ostream& out) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + cfg.output_dir.string() + ": " + ec.message());
  write_json(cfg.output_dir / "resolved_config.json", to_tree(cfg));

  RunLog log(cfg.output_dir);
  log.line(std::string(command_name(command)) + " started");
  try {
    switch (command) {
      case Command::train_classifier: train_classifier_cmd(cfg, out); break;
      case Command::train_topoae: train_topoae_cmd(cfg, out); break;
      case Command::train_reformer: train_reformer_cmd(cfg, out); break;
      case Command::attack: attack_cmd(cfg, out); break;
      case Command::evaluate: evaluate_cmd(cfg, out); break;
      case Command::ablate: ablate_cmd(cfg, out); break;
      case Command::gradcheck: gradcheck_cmd(cfg, out); break;
      case Command::export_latents: export_latents_cmd(cfg, out); break;
    }
  } catch (const Error& e) {
    log.line(std::string(command_name(command)) + " failed: " + std::string(error_code_name(e.code())));
    throw;
  }
  log.line(std::string(command_name(command)) + " finished");
}

}  // namespace toporeform::cli
