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

#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "toporeform/error.hpp"

namespace toporeform::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string default_data_root() {
  if (const char* env = std::getenv("TOPOREFORM_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "data/mnist-desk";
}

ordered_json attack_tree(const attacks::AttackConfig& a, bool seed_from_master) {
  ordered_json j;
  j["kind"] = std::string(attacks::attack_name(a.kind));
  j["epsilon"] = a.epsilon;
  j["alpha"] = a.alpha ? ordered_json(*a.alpha) : ordered_json(nullptr);
  j["steps"] = a.steps;
  j["c"] = a.c;
  j["kappa"] = a.kappa;
  j["cw_lr"] = a.cw_lr;
  j["samples"] = a.samples;
  j["seed"] = seed_from_master ? ordered_json(nullptr) : ordered_json(a.seed);
  j["random_start"] = a.random_start;
  return j;
}

std::vector<attacks::AttackConfig> default_attacks() {
  using attacks::AttackKind;
  std::vector<attacks::AttackConfig> list;
  for (double eps : {0.005, 0.01}) {
    attacks::AttackConfig a;
    a.kind = AttackKind::fgsm;
    a.epsilon = eps;
    list.push_back(a);
    a.kind = AttackKind::pgd;
    list.push_back(a);
  }
  for (double c : {1.0, 10.0}) {
    attacks::AttackConfig a;
    a.kind = AttackKind::cw;
    a.c = c;
    a.steps = 200;
    list.push_back(a);
  }
  return list;
}

std::string stage_key(pipeline::Stage s) {
  switch (s) {
    case pipeline::Stage::no_defense: return "no_defense";
    case pipeline::Stage::topoae: return "topoae";
    case pipeline::Stage::reformer: return "reformer";
    case pipeline::Stage::aux: return "aux";
    case pipeline::Stage::warmup: return "warmup";
  }
  return "";
}

// Integers are accepted where the default is a float, and non-negative
// integers where it is unsigned, but never the other way round.
bool same_kind(const json& def, const json& val) {
  if (def.is_null()) return val.is_null() || val.is_number();
  if (def.is_number_float()) return val.is_number();
  if (def.is_number_unsigned()) {
    return val.is_number_unsigned() || (val.is_number_integer() && val.get<std::int64_t>() >= 0);
  }
  if (def.is_number_integer()) return val.is_number_integer();
  return def.type() == val.type();
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, path + ": " + what);
}

void overlay(ordered_json& base, const json& user, const std::string& path);

void overlay_attacks(ordered_json& base, const json& user, const std::string& path) {
  if (!user.is_array()) invalid(path, "expected an array");
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < user.size(); ++i) {
    ordered_json item = attack_tree(attacks::AttackConfig{}, true);
    overlay(item, user[i], path + "." + std::to_string(i));
    out.push_back(std::move(item));
  }
  base = std::move(out);
}

void overlay(ordered_json& base, const json& user, const std::string& path) {
  if (base.is_object()) {
    if (!user.is_object()) invalid(path, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string child = path.empty() ? it.key() : path + "." + it.key();
      if (!base.contains(it.key())) invalid(child, "unknown key");
      if (child == "attacks") {
        overlay_attacks(base[it.key()], it.value(), child);
      } else {
        overlay(base[it.key()], it.value(), child);
      }
    }
    return;
  }
  if (base.is_array() && user.is_array()) {
    for (const auto& v : user) {
      if (!base.empty() && !same_kind(base.front(), v)) invalid(path, "array element of the wrong type");
    }
    base = user;
    return;
  }
  if (!same_kind(base, user)) invalid(path, "expected " + std::string(base.type_name()) + ", got " + user.type_name());
  base = user;
}

template <class T>
T get(const ordered_json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(path + "." + key, e.what());
  }
}

pipeline::Stage parse_stage(const std::string& name) {
  auto s = pipeline::stage_from_name(name);
  if (!s) invalid("stage", "unknown stage '" + name + "'");
  return *s;
}

attacks::AttackConfig parse_attack(const ordered_json& j, std::uint64_t master, const std::string& path) {
  attacks::AttackConfig a;
  auto kind = attacks::attack_from_name(get<std::string>(j, "kind", path));
  if (!kind) invalid(path + ".kind", "unknown attack '" + j["kind"].get<std::string>() + "'");
  a.kind = *kind;
  a.epsilon = get<double>(j, "epsilon", path);
  if (!j.at("alpha").is_null()) a.alpha = get<double>(j, "alpha", path);
  a.steps = get<std::size_t>(j, "steps", path);
  a.c = get<double>(j, "c", path);
  a.kappa = get<double>(j, "kappa", path);
  a.cw_lr = get<double>(j, "cw_lr", path);
  a.samples = get<std::size_t>(j, "samples", path);
  a.seed = j.at("seed").is_null() ? master : get<std::uint64_t>(j, "seed", path);
  a.random_start = get<bool>(j, "random_start", path);
  try {
    attacks::validate(a);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return a;
}

std::vector<std::string> split_dotted(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  return parts;
}

}  // namespace

ordered_json to_tree(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  ordered_json t;
  t["seed"] = cfg.seed;
  t["output_dir"] = cfg.output_dir.string();
  t["models_dir"] = cfg.models_dir.string();

  auto& d = t["data"];
  d["root"] = cfg.data.root.string();
  d["train_images"] = cfg.data.train_images;
  d["train_labels"] = cfg.data.train_labels;
  d["test_images"] = cfg.data.test_images;
  d["test_labels"] = cfg.data.test_labels;
  d["train_limit"] = cfg.data.train_limit;
  d["test_limit"] = cfg.data.test_limit;

  auto& pj = t["pipeline"];
  pj["classifier"] = {{"conv_channels", p.classifier.conv_channels},
                      {"kernel", p.classifier.kernel},
                      {"dense", p.classifier.dense},
                      {"classes", p.classifier.classes}};
  pj["topoae"] = {{"channels1", p.topoae.channels1},
                  {"channels2", p.topoae.channels2},
                  {"latent", p.topoae.latent},
                  {"decoder_hidden", p.topoae.decoder_hidden},
                  {"lambda", p.topoae.lambda}};
  pj["reformer"] = {{"encoder_hidden", p.reformer.encoder_hidden},
                    {"latent", p.reformer.latent},
                    {"aux", p.reformer.aux},
                    {"decoder_hidden", p.reformer.decoder_hidden}};
  pj["aux_hidden"] = p.aux_hidden;
  pj["weights"] = {{"reconstruction", p.weights.reconstruction},
                   {"classification", p.weights.classification},
                   {"kl", p.weights.kl}};
  pj["classifier_epochs"] = p.classifier_epochs;
  pj["topoae_epochs"] = p.topoae_epochs;
  pj["reformer_epochs"] = p.reformer_epochs;
  pj["warmup_epochs"] = p.warmup_epochs;
  pj["batch_size"] = p.batch_size;
  pj["lr"] = p.lr;
  pj["mse_target"] = p.mse_target == pipeline::MseTarget::purified ? "purified" : "original";
  pj["inference_noise"] = p.inference_noise == pipeline::InferenceNoise::zero ? "zero" : "sample";
  pj["warmup_freeze"] = p.warmup_freeze == pipeline::WarmupFreeze::encoder ? "encoder" : "encoder_and_decoder";

  t["attacks"] = ordered_json::array();
  for (const auto& a : cfg.attacks) t["attacks"].push_back(attack_tree(a, false));

  auto& e = t["eval"];
  e["stages"] = ordered_json::array();
  for (auto s : cfg.eval.stages) e["stages"].push_back(stage_key(s));
  e["limit"] = cfg.eval.limit;
  e["chunk"] = cfg.eval.chunk;
  e["attack_stage"] = stage_key(cfg.eval.attack_stage);

  t["gradcheck"] = {{"seeds", cfg.gradcheck.seeds},
                    {"tolerance", cfg.gradcheck.tolerance},
                    {"mlp_tolerance", cfg.gradcheck.mlp_tolerance}};
  return t;
}

ordered_json default_tree() {
  RunConfig cfg;
  cfg.data.root = default_data_root();
  cfg.attacks = default_attacks();
  ordered_json t = to_tree(cfg);
  // Attack seeds default to the master seed.
  for (auto& a : t["attacks"]) a["seed"] = nullptr;
  return t;
}

ordered_json merge_tree(const json& user) {
  ordered_json tree = default_tree();
  overlay(tree, user, "");
  return tree;
}

void apply_override(ordered_json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) invalid(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  ordered_json* node = &tree;
  std::string path;
  const auto parts = split_dotted(key);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    path += (path.empty() ? "" : ".") + part;
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        invalid(path, "expected an array index");
      }
      if (idx >= node->size()) invalid(path, "index out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(part)) invalid(path, "unknown key");
      node = &(*node)[part];
    } else {
      invalid(path, "not a container");
    }
    if (last) {
      if (path == "attacks") {
        overlay_attacks(*node, value, path);
      } else {
        // Quoting is optional for string values; a bare number aimed at a
        // string field is taken literally.
        if (node->is_string() && !value.is_string()) value = raw;
        overlay(*node, value, path);
      }
    }
  }
}

RunConfig from_tree(const ordered_json& t) {
  RunConfig cfg;
  cfg.seed = get<std::uint64_t>(t, "seed", "");
  cfg.output_dir = get<std::string>(t, "output_dir", "");
  cfg.models_dir = get<std::string>(t, "models_dir", "");

  const auto& d = t.at("data");
  cfg.data.root = get<std::string>(d, "root", "data");
  cfg.data.train_images = get<std::string>(d, "train_images", "data");
  cfg.data.train_labels = get<std::string>(d, "train_labels", "data");
  cfg.data.test_images = get<std::string>(d, "test_images", "data");
  cfg.data.test_labels = get<std::string>(d, "test_labels", "data");
  cfg.data.train_limit = get<std::size_t>(d, "train_limit", "data");
  cfg.data.test_limit = get<std::size_t>(d, "test_limit", "data");

  const auto& pj = t.at("pipeline");
  auto& p = cfg.pipeline;
  const auto& cj = pj.at("classifier");
  p.classifier.conv_channels = get<std::vector<std::size_t>>(cj, "conv_channels", "pipeline.classifier");
  p.classifier.kernel = get<std::size_t>(cj, "kernel", "pipeline.classifier");
  p.classifier.dense = get<std::vector<std::size_t>>(cj, "dense", "pipeline.classifier");
  p.classifier.classes = get<int>(cj, "classes", "pipeline.classifier");
  const auto& tj = pj.at("topoae");
  p.topoae.channels1 = get<std::size_t>(tj, "channels1", "pipeline.topoae");
  p.topoae.channels2 = get<std::size_t>(tj, "channels2", "pipeline.topoae");
  p.topoae.latent = get<std::size_t>(tj, "latent", "pipeline.topoae");
  p.topoae.decoder_hidden = get<std::size_t>(tj, "decoder_hidden", "pipeline.topoae");
  p.topoae.lambda = get<double>(tj, "lambda", "pipeline.topoae");
  const auto& rj = pj.at("reformer");
  p.reformer.encoder_hidden = get<std::size_t>(rj, "encoder_hidden", "pipeline.reformer");
  p.reformer.latent = get<std::size_t>(rj, "latent", "pipeline.reformer");
  p.reformer.aux = get<std::size_t>(rj, "aux", "pipeline.reformer");
  p.reformer.decoder_hidden = get<std::size_t>(rj, "decoder_hidden", "pipeline.reformer");
  p.aux_hidden = get<std::size_t>(pj, "aux_hidden", "pipeline");
  const auto& wj = pj.at("weights");
  p.weights.reconstruction = get<double>(wj, "reconstruction", "pipeline.weights");
  p.weights.classification = get<double>(wj, "classification", "pipeline.weights");
  p.weights.kl = get<double>(wj, "kl", "pipeline.weights");
  p.classifier_epochs = get<std::size_t>(pj, "classifier_epochs", "pipeline");
  p.topoae_epochs = get<std::size_t>(pj, "topoae_epochs", "pipeline");
  p.reformer_epochs = get<std::size_t>(pj, "reformer_epochs", "pipeline");
  p.warmup_epochs = get<std::size_t>(pj, "warmup_epochs", "pipeline");
  p.batch_size = get<std::size_t>(pj, "batch_size", "pipeline");
  p.lr = get<double>(pj, "lr", "pipeline");
  p.seed = cfg.seed;

  const auto mse = get<std::string>(pj, "mse_target", "pipeline");
  if (mse == "purified") p.mse_target = pipeline::MseTarget::purified;
  else if (mse == "original") p.mse_target = pipeline::MseTarget::original;
  else invalid("pipeline.mse_target", "expected purified or original");
  const auto noise = get<std::string>(pj, "inference_noise", "pipeline");
  if (noise == "zero") p.inference_noise = pipeline::InferenceNoise::zero;
  else if (noise == "sample") p.inference_noise = pipeline::InferenceNoise::sample;
  else invalid("pipeline.inference_noise", "expected zero or sample");
  const auto freeze = get<std::string>(pj, "warmup_freeze", "pipeline");
  if (freeze == "encoder") p.warmup_freeze = pipeline::WarmupFreeze::encoder;
  else if (freeze == "encoder_and_decoder") p.warmup_freeze = pipeline::WarmupFreeze::encoder_and_decoder;
  else invalid("pipeline.warmup_freeze", "expected encoder or encoder_and_decoder");

  try {
    pipeline::validate(p);
  } catch (const Error& e) {
    invalid("pipeline", e.what());
  }

  const auto& aj = t.at("attacks");
  for (std::size_t i = 0; i < aj.size(); ++i) {
    cfg.attacks.push_back(parse_attack(aj[i], cfg.seed, "attacks." + std::to_string(i)));
  }

  const auto& ej = t.at("eval");
  cfg.eval.stages.clear();
  for (const auto& s : ej.at("stages")) cfg.eval.stages.push_back(parse_stage(s.get<std::string>()));
  if (cfg.eval.stages.empty()) invalid("eval.stages", "at least one stage is required");
  cfg.eval.limit = get<std::size_t>(ej, "limit", "eval");
  cfg.eval.chunk = get<std::size_t>(ej, "chunk", "eval");
  if (cfg.eval.chunk == 0) invalid("eval.chunk", "must be positive");
  cfg.eval.attack_stage = parse_stage(get<std::string>(ej, "attack_stage", "eval"));

  const auto& gj = t.at("gradcheck");
  cfg.gradcheck.seeds = get<std::size_t>(gj, "seeds", "gradcheck");
  cfg.gradcheck.tolerance = get<double>(gj, "tolerance", "gradcheck");
  cfg.gradcheck.mlp_tolerance = get<double>(gj, "mlp_tolerance", "gradcheck");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& config_path, const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(ErrorCode::ConfigInvalid, "cannot open config " + config_path.string());
    user = json::parse(in, nullptr, false);
    if (user.is_discarded()) fail(ErrorCode::ConfigInvalid, config_path.string() + ": not valid JSON");
  }
  ordered_json tree = merge_tree(user);
  for (const auto& o : overrides) apply_override(tree, o);
  return from_tree(tree);
}

}  // namespace toporeform::cli
