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

#include "toporeform/pipeline/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "toporeform/error.hpp"
#include "toporeform/metrics/metrics.hpp"
#include "toporeform/random.hpp"

namespace toporeform::pipeline {

nlohmann::ordered_json attack_params(const attacks::AttackConfig& cfg) {
  nlohmann::ordered_json p;
  p["epsilon"] = cfg.epsilon;
  p["alpha"] = cfg.step_size();
  p["steps"] = cfg.steps;
  p["c"] = cfg.c;
  p["kappa"] = cfg.kappa;
  p["cw_lr"] = cfg.cw_lr;
  p["samples"] = cfg.samples;
  p["seed"] = cfg.seed;
  p["random_start"] = cfg.random_start;
  return p;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["seed"] = seed;
  j["stages"] = nlohmann::ordered_json::array();
  for (const StageRows& s : stages) {
    nlohmann::ordered_json stage;
    stage["name"] = s.name;
    stage["attacks"] = nlohmann::ordered_json::array();
    for (const AttackRow& r : s.attacks) {
      nlohmann::ordered_json row;
      row["kind"] = attacks::attack_name(r.attack.kind);
      row["params"] = attack_params(r.attack);
      row["accuracy"] = r.accuracy;
      row["f1_macro"] = r.f1_macro;
      row["precision_macro"] = r.precision_macro;
      row["asr"] = r.asr;
      stage["attacks"].push_back(std::move(row));
    }
    j["stages"].push_back(std::move(stage));
  }
  return j;
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "stage,kind,epsilon,alpha,steps,c,kappa,cw_lr,samples,seed,random_start,accuracy,f1_macro,precision_macro,"
         "asr\n";
  const auto old = out.precision(17);
  for (const StageRows& s : stages) {
    for (const AttackRow& r : s.attacks) {
      const auto& a = r.attack;
      out << s.name << ',' << attacks::attack_name(a.kind) << ',' << a.epsilon << ',' << a.step_size() << ','
          << a.steps << ',' << a.c << ',' << a.kappa << ',' << a.cw_lr << ',' << a.samples << ',' << a.seed << ','
          << (a.random_start ? "true" : "false") << ',' << r.accuracy << ',' << r.f1_macro << ','
          << r.precision_macro << ',' << r.asr << '\n';
    }
  }
  out.precision(old);
}

AttackRow evaluate_attack(const attacks::TargetFn& target, const dataio::Dataset& data,
                          const attacks::AttackConfig& attack, const EvalOptions& options,
                          attacks::AttackResult* adversarial_out) {
  require(data.size() > 0, ErrorCode::EmptyDataset, "evaluation needs at least one sample");
  attacks::validate(attack);
  const std::size_t chunk = std::max<std::size_t>(options.chunk, 1);
  std::vector<int> clean, adversarial;
  std::vector<double> pixels;
  std::vector<bool> success;
  for (std::size_t start = 0, part = 0; start < data.size(); start += chunk, ++part) {
    std::vector<std::size_t> idx(std::min(chunk, data.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const dataio::Dataset slice = data.subset(idx);
    attacks::AttackConfig cfg = attack;
    cfg.seed = derive_seed(attack.seed, part);
    const auto before = target.predict(slice.images);
    const auto result = attacks::run_attack(target, slice.images, slice.labels, cfg);
    const auto after = target.predict(result.x_adv);
    clean.insert(clean.end(), before.begin(), before.end());
    adversarial.insert(adversarial.end(), after.begin(), after.end());
    if (adversarial_out != nullptr) {
      pixels.insert(pixels.end(), result.x_adv.data().begin(), result.x_adv.data().end());
      success.insert(success.end(), result.success.begin(), result.success.end());
    }
  }
  if (adversarial_out != nullptr) {
    Shape shape = data.images.shape();
    adversarial_out->x_adv = Tensor(std::move(shape), std::move(pixels));
    adversarial_out->success = std::move(success);
  }
  const auto cm = metrics::confusion(data.labels, adversarial, data.class_count);
  const auto scores = metrics::macro_scores(cm, options.macro ? metrics::Averaging::macro : metrics::Averaging::weighted);
  AttackRow row;
  row.attack = attack;
  row.accuracy = scores.accuracy;
  row.f1_macro = scores.f1;
  row.precision_macro = scores.precision;
  row.asr = attacks::attack_success_rate(clean, adversarial, data.labels);
  return row;
}

EvalReport ablation_run(const dataio::Dataset& data, std::span<const attacks::AttackConfig> attack_list,
                        const StageModels& models, std::span<const Stage> stages, const EvalOptions& options) {
  EvalReport report;
  report.dataset = options.dataset;
  report.seed = options.seed;
  for (Stage stage : stages) {
    const attacks::TargetFn target = stage_target(models, stage, options.noise);
    StageRows rows{std::string(stage_name(stage)), {}};
    for (const attacks::AttackConfig& attack : attack_list) {
      rows.attacks.push_back(evaluate_attack(target, data, attack, options));
    }
    report.stages.push_back(std::move(rows));
  }
  return report;
}

}  // namespace toporeform::pipeline
