// Copyright 2026 The NSNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nsnn/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nsnn/errors.h"

namespace nsnn {

using nlohmann::json;

bool is_known_task(const std::string& task) {
  const auto& t = known_tasks();
  return std::find(t.begin(), t.end(), task) != t.end();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(get_count(e, key));
  return out;
}

template <typename Enum>
Enum get_enum(const json& v, const std::string& key,
              Enum (*convert)(const std::string&)) {
  const auto name = get_as<std::string>(v, key);
  try {
    return convert(name);
  } catch (const Error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"task", [](auto& c, const json& v) { c.task = get_as<std::string>(v, "task"); }},
      {"seed", [](auto& c, const json& v) { c.seed = get_count(v, "seed"); }},
      {"out", [](auto& c, const json& v) { c.out = get_as<std::string>(v, "out"); }},
      {"model_file",
       [](auto& c, const json& v) { c.model_ref = get_as<std::string>(v, "model_file"); }},
      {"hidden", [](auto& c, const json& v) { c.hidden = get_counts(v, "hidden"); }},
      {"init_gain", [](auto& c, const json& v) { c.init_gain = get_as<double>(v, "init_gain"); }},
      {"tau", [](auto& c, const json& v) { c.lif.tau = get_as<double>(v, "tau"); }},
      {"v_th", [](auto& c, const json& v) { c.lif.v_th = get_as<double>(v, "v_th"); }},
      {"u_reset", [](auto& c, const json& v) { c.lif.u_reset = get_as<double>(v, "u_reset"); }},
      {"noise",
       [](auto& c, const json& v) {
         c.noise.family = get_enum(v, "noise", &noise_family_from_string);
       }},
      {"noise_scale",
       [](auto& c, const json& v) { c.noise.scale = get_as<double>(v, "noise_scale"); }},
      {"loss_mode",
       [](auto& c, const json& v) { c.loss_mode = get_enum(v, "loss_mode", &loss_mode_from_string); }},
      {"n_classes",
       [](auto& c, const json& v) { c.dataset.n_classes = get_count(v, "n_classes"); }},
      {"input_dim",
       [](auto& c, const json& v) { c.dataset.input_dim = get_count(v, "input_dim"); }},
      {"steps", [](auto& c, const json& v) { c.dataset.steps = get_count(v, "steps"); }},
      {"rate_hi", [](auto& c, const json& v) { c.dataset.rate_hi = get_as<double>(v, "rate_hi"); }},
      {"rate_lo", [](auto& c, const json& v) { c.dataset.rate_lo = get_as<double>(v, "rate_lo"); }},
      {"n_train", [](auto& c, const json& v) { c.dataset.n_train = get_count(v, "n_train"); }},
      {"n_test", [](auto& c, const json& v) { c.dataset.n_test = get_count(v, "n_test"); }},
      {"jitter", [](auto& c, const json& v) { c.dataset.jitter = get_as<double>(v, "jitter"); }},
      {"prototype_density",
       [](auto& c, const json& v) {
         c.dataset.prototype_density = get_as<double>(v, "prototype_density");
       }},
      {"coding",
       [](auto& c, const json& v) {
         c.dataset.coding = get_enum(v, "coding", &input_coding_from_string);
       }},
      {"rule",
       [](auto& c, const json& v) { c.rule = get_enum(v, "rule", &learning_rule_from_string); }},
      {"optimizer",
       [](auto& c, const json& v) {
         c.optimizer.method = get_enum(v, "optimizer", &optimizer_method_from_string);
       }},
      {"lr",
       [](auto& c, const json& v) { c.optimizer.learning_rate = get_as<double>(v, "lr"); }},
      {"lr_grid",
       [](auto& c, const json& v) { c.lr_grid = get_as<std::vector<double>>(v, "lr_grid"); }},
      {"cosine", [](auto& c, const json& v) { c.optimizer.cosine = get_as<bool>(v, "cosine"); }},
      {"epochs", [](auto& c, const json& v) { c.epochs = get_count(v, "epochs"); }},
      {"batch_size", [](auto& c, const json& v) { c.batch_size = get_count(v, "batch_size"); }},
      {"record_timing",
       [](auto& c, const json& v) { c.record_timing = get_as<bool>(v, "record_timing"); }},
      {"eval_passes",
       [](auto& c, const json& v) { c.eval_passes = get_count(v, "eval_passes"); }},
      {"attack",
       [](auto& c, const json& v) {
         c.attack.method = get_enum(v, "attack", &attack_method_from_string);
       }},
      {"intensities",
       [](auto& c, const json& v) {
         c.intensities = get_as<std::vector<double>>(v, "intensities");
       }},
      {"do_iters", [](auto& c, const json& v) { c.attack.do_iters = get_count(v, "do_iters"); }},
      {"do_lr", [](auto& c, const json& v) { c.attack.do_lr = get_as<double>(v, "do_lr"); }},
      {"attack_grad_samples",
       [](auto& c, const json& v) {
         c.attack.grad_samples = get_count(v, "attack_grad_samples");
       }},
      {"compare_dsnn",
       [](auto& c, const json& v) { c.compare_dsnn = get_as<bool>(v, "compare_dsnn"); }},
      {"a1_values",
       [](auto& c, const json& v) {
         c.stability.a1_values = get_as<std::vector<double>>(v, "a1_values");
       }},
      {"a2_values",
       [](auto& c, const json& v) {
         c.stability.a2_values = get_as<std::vector<double>>(v, "a2_values");
       }},
      {"b2_values",
       [](auto& c, const json& v) {
         c.stability.b2_values = get_as<std::vector<double>>(v, "b2_values");
       }},
      {"variants",
       [](auto& c, const json& v) {
         c.stability.variants.clear();
         for (const auto& e : get_as<std::vector<std::string>>(v, "variants")) {
           try {
             c.stability.variants.push_back(error_diffusion_from_string(e));
           } catch (const Error& err) {
             throw ConfigError(std::string("config key 'variants': ") + err.what());
           }
         }
       }},
      {"dt", [](auto& c, const json& v) { c.stability.dt = get_as<double>(v, "dt"); }},
      {"horizon",
       [](auto& c, const json& v) { c.stability.horizon = get_as<double>(v, "horizon"); }},
      {"n_paths", [](auto& c, const json& v) { c.stability.n_paths = get_count(v, "n_paths"); }},
      {"sde_dim", [](auto& c, const json& v) { c.stability.dim = get_count(v, "sde_dim"); }},
      {"burn_in",
       [](auto& c, const json& v) { c.stability.burn_in = get_as<double>(v, "burn_in"); }},
      {"slack", [](auto& c, const json& v) { c.stability.slack = get_as<double>(v, "slack"); }},
      {"n_trials", [](auto& c, const json& v) { c.n_trials = get_count(v, "n_trials"); }},
      {"coding_samples",
       [](auto& c, const json& v) { c.coding_samples = get_count(v, "coding_samples"); }},
      {"bootstrap", [](auto& c, const json& v) { c.bootstrap = get_count(v, "bootstrap"); }},
      {"fit_neurons",
       [](auto& c, const json& v) { c.fit_neurons = get_count(v, "fit_neurons"); }},
      {"fit_iters", [](auto& c, const json& v) { c.fit_iters = get_count(v, "fit_iters"); }},
      {"psp_tau", [](auto& c, const json& v) { c.psp_tau = get_as<double>(v, "psp_tau"); }},
      {"grad_samples",
       [](auto& c, const json& v) { c.grad_samples = get_count(v, "grad_samples"); }},
      {"grad_steps", [](auto& c, const json& v) { c.grad_steps = get_count(v, "grad_steps"); }},
      {"grad_label", [](auto& c, const json& v) { c.grad_label = get_count(v, "grad_label"); }},
      {"grad_threshold",
       [](auto& c, const json& v) { c.grad_threshold = get_as<double>(v, "grad_threshold"); }},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate(const ExperimentConfig& c) {
  if (!c.task.empty()) require(is_known_task(c.task), "unknown task '" + c.task + "'");
  require(!c.hidden.empty(), "hidden must list at least one layer");
  for (auto h : c.hidden) require(h > 0, "hidden layer sizes must be positive");
  require(c.init_gain > 0.0, "init_gain must be positive");
  require(c.lif.tau > 0.0 && c.lif.tau < 1.0, "tau must lie in (0, 1)");
  if (!c.noise.is_deterministic()) {
    require(c.noise.scale > 0.0 && c.noise.scale <= 2.0,
            "noise_scale must lie in (0, 2]");
  }
  c.dataset.validate();
  require(c.optimizer.learning_rate > 0.0, "lr must be positive");
  for (double lr : c.lr_grid) require(lr > 0.0, "lr_grid entries must be positive");
  require(c.epochs > 0, "epochs must be positive");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.eval_passes > 0, "eval_passes must be positive");
  require(!c.intensities.empty(), "intensities must not be empty");
  for (double v : c.intensities) require(v >= 0.0, "intensities must be non-negative");
  try {
    c.attack.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  require(c.stability.dt > 0.0 && c.stability.horizon > c.stability.dt,
          "stability needs 0 < dt < horizon");
  require(c.stability.n_paths >= 2, "n_paths must be at least 2");
  require(c.stability.dim > 0, "sde_dim must be positive");
  require(c.stability.burn_in >= 0.0 && c.stability.burn_in < 1.0,
          "burn_in must lie in [0, 1)");
  require(!c.stability.variants.empty(), "variants must not be empty");
  for (double a : c.stability.a2_values) require(a >= 0.0, "a2_values must be >= 0");
  for (double b : c.stability.b2_values) require(b >= 0.0, "b2_values must be >= 0");
  require(c.n_trials >= 2, "n_trials must be at least 2");
  require(c.coding_samples >= 3, "coding_samples must be at least 3");
  require(c.fit_neurons > 0, "fit_neurons must be positive");
  require(c.psp_tau > 1.0, "psp_tau must exceed 1");
  require(c.grad_samples >= 2, "grad_samples must be at least 2");
  require(c.grad_steps > 0, "grad_steps must be positive");
  require(c.grad_label < 2, "grad_label must index one of the 2 fixture classes");
  require(c.grad_threshold > 0.0, "grad_threshold must be positive");
}

}  // namespace

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["task"] = task;
  j["seed"] = seed;
  j["model_file"] = model_ref;
  j["hidden"] = hidden;
  j["init_gain"] = init_gain;
  j["tau"] = lif.tau;
  j["v_th"] = lif.v_th;
  j["u_reset"] = lif.u_reset;
  j["noise"] = to_string(noise.family);
  j["noise_scale"] = noise.scale;
  j["loss_mode"] = to_string(loss_mode);
  j["n_classes"] = dataset.n_classes;
  j["input_dim"] = dataset.input_dim;
  j["steps"] = dataset.steps;
  j["rate_hi"] = dataset.rate_hi;
  j["rate_lo"] = dataset.rate_lo;
  j["n_train"] = dataset.n_train;
  j["n_test"] = dataset.n_test;
  j["jitter"] = dataset.jitter;
  j["prototype_density"] = dataset.prototype_density;
  j["coding"] = to_string(dataset.coding);
  j["rule"] = to_string(rule);
  j["optimizer"] = to_string(optimizer.method);
  j["lr"] = optimizer.learning_rate;
  j["lr_grid"] = lr_grid;
  j["cosine"] = optimizer.cosine;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["record_timing"] = record_timing;
  j["eval_passes"] = eval_passes;
  j["attack"] = to_string(attack.method);
  j["intensities"] = intensities;
  j["do_iters"] = attack.do_iters;
  j["do_lr"] = attack.do_lr;
  j["attack_grad_samples"] = attack.grad_samples;
  j["compare_dsnn"] = compare_dsnn;
  j["a1_values"] = stability.a1_values;
  j["a2_values"] = stability.a2_values;
  j["b2_values"] = stability.b2_values;
  std::vector<std::string> variants;
  for (auto v : stability.variants) variants.push_back(to_string(v));
  j["variants"] = variants;
  j["dt"] = stability.dt;
  j["horizon"] = stability.horizon;
  j["n_paths"] = stability.n_paths;
  j["sde_dim"] = stability.dim;
  j["burn_in"] = stability.burn_in;
  j["slack"] = stability.slack;
  j["n_trials"] = n_trials;
  j["coding_samples"] = coding_samples;
  j["bootstrap"] = bootstrap;
  j["fit_neurons"] = fit_neurons;
  j["fit_iters"] = fit_iters;
  j["psp_tau"] = psp_tau;
  j["grad_samples"] = grad_samples;
  j["grad_steps"] = grad_steps;
  j["grad_label"] = grad_label;
  j["grad_threshold"] = grad_threshold;
  return j.dump();
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical_json()); }

ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value);
  }
  // A deterministic network has no noise scale.
  if (c.noise.is_deterministic()) c.noise.scale = 0.0;
  validate(c);
  if (!c.model_ref.empty()) {
    const std::filesystem::path p(c.model_ref);
    c.model_file = p.is_absolute() ? p : base_dir / p;
    if (!std::filesystem::exists(c.model_file)) {
      throw ConfigError("model_file '" + c.model_file.string() + "' does not exist");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace nsnn
