// Copyright 2026 The CLEIT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cleit/config.hpp"

#include <fstream>
#include <sstream>

#include "cleit/error.hpp"

namespace cleit {
using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 40 ? s.substr(0, 37) + "..." : s;
}

// Checks `given` against the shape of a fully defaulted document: objects
// may only use known keys, scalars must match the default's type.
void check_against(const json& given, const json& schema, const std::string& path) {
  if (schema.is_object()) {
    if (!given.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : given.items()) {
      if (!schema.contains(key)) throw ConfigError("unknown config field '" + join(path, key) + "'");
      check_against(value, schema.at(key), join(path, key));
    }
    return;
  }
  if (schema.is_array()) {
    if (!given.is_array()) throw ConfigError(path + ": expected an array");
    if (!schema.empty()) {
      for (const auto& v : given) check_against(v, schema.front(), path + "[]");
    }
    return;
  }
  bool ok = true;
  if (schema.is_boolean()) {
    ok = given.is_boolean();
  } else if (schema.is_number_unsigned()) {
    ok = given.is_number_unsigned() || (given.is_number_integer() && given.get<std::int64_t>() >= 0);
  } else if (schema.is_number_integer()) {
    ok = given.is_number_integer();
  } else if (schema.is_number()) {
    ok = given.is_number();
  } else if (schema.is_string()) {
    ok = given.is_string();
  }
  if (!ok) {
    throw ConfigError(path + ": expected " + std::string(schema.type_name()) + ", got " +
                      describe(given));
  }
}

json data_schema() { return {{"high", ""}, {"low", ""}, {"labels", ""}}; }

TrainPlan plan_from_json(const json& j, Phase phase) {
  TrainPlan p = TrainPlan::defaults(phase);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.lr = j.value("lr", p.lr);
  p.max_epochs = j.value("max_epochs", p.max_epochs);
  p.patience = j.value("patience", p.patience);
  p.min_delta = j.value("min_delta", p.min_delta);
  p.temperature = j.value("temperature", p.temperature);
  p.latent_mean_target = j.value("latent_mean_target", p.latent_mean_target);
  p.mmd_multipliers = j.value("mmd_multipliers", p.mmd_multipliers);
  if (j.contains("wgan")) {
    const json& w = j.at("wgan");
    p.wgan.critic_steps = w.value("critic_steps", p.wgan.critic_steps);
    p.wgan.gradient_penalty = w.value("gradient_penalty", p.wgan.gradient_penalty);
    p.wgan.critic_hidden = w.value("critic_hidden", p.wgan.critic_hidden);
  }
  p.decay = j.value("decay", p.decay);
  p.n_frozen = j.value("n_frozen", p.n_frozen);
  p.n_unfreeze = j.value("n_unfreeze", p.n_unfreeze);
  p.sample_latent = j.value("sample_latent", p.sample_latent);
  return p;
}

constexpr Phase kPhases[] = {Phase::pretrain_high, Phase::finetune_high, Phase::pretrain_low,
                             Phase::finetune_low};

std::string phase_key(Phase phase) {
  std::string s(phase_name(phase));
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

json schema() {
  RunConfig c;
  c.synth = SynthSpec{};
  json j = to_json(c);
  j["data"] = data_schema();
  return j;
}

}  // namespace

const TrainPlan& RunConfig::plan(Phase phase) const {
  switch (phase) {
    case Phase::pretrain_high:
      return pretrain_high;
    case Phase::finetune_high:
      return finetune_high;
    case Phase::pretrain_low:
      return pretrain_low;
    case Phase::finetune_low:
      return finetune_low;
  }
  throw PreconditionError("unknown phase");
}

TrainPlan& RunConfig::plan(Phase phase) {
  return const_cast<TrainPlan&>(static_cast<const RunConfig&>(*this).plan(phase));
}

void RunConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
  if (repeats < 1) throw ConfigError("repeats: must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction: must lie strictly between 0 and 1");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    std::ostringstream msg;
    msg << "lambda: must lie in [0, 1] (got " << lambda << ")";
    throw ConfigError(msg.str());
  }
  if (synth.has_value() == data.has_value()) {
    throw ConfigError("synth, data: exactly one data source must be given");
  }
  if (synth) {
    try {
      synth->validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("synth: ") + e.what());
    }
  }
  if (data) {
    for (const auto& [field, path] : {std::pair{"data.high", data->high},
                                      std::pair{"data.low", data->low},
                                      std::pair{"data.labels", data->labels}}) {
      if (path.empty()) throw ConfigError(std::string(field) + ": path is required");
      if (!std::filesystem::is_regular_file(path)) {
        throw ConfigError(std::string(field) + ": file not found: " + path.string());
      }
    }
  }
  try {
    model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  for (Phase phase : kPhases) {
    TrainPlan p = plan(phase);
    p.clr = loss;
    p.lambda = lambda;
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("phases." + std::string(e.what()));
    }
  }
}

json to_json(const TrainPlan& p) {
  return {{"batch_size", p.batch_size},
          {"lr", p.lr},
          {"max_epochs", p.max_epochs},
          {"patience", p.patience},
          {"min_delta", p.min_delta},
          {"temperature", p.temperature},
          {"latent_mean_target", p.latent_mean_target},
          {"mmd_multipliers", p.mmd_multipliers},
          {"wgan",
           {{"critic_steps", p.wgan.critic_steps},
            {"gradient_penalty", p.wgan.gradient_penalty},
            {"critic_hidden", p.wgan.critic_hidden}}},
          {"decay", p.decay},
          {"n_frozen", p.n_frozen},
          {"n_unfreeze", p.n_unfreeze},
          {"sample_latent", p.sample_latent}};
}

json to_json(const RunConfig& c) {
  json phases = json::object();
  for (Phase phase : kPhases) phases[phase_key(phase)] = to_json(c.plan(phase));
  json j = {{"seed", c.seed},
            {"out_dir", c.out_dir},
            {"repeats", c.repeats},
            {"train_fraction", c.train_fraction},
            {"standardize", c.standardize},
            {"baselines", c.baselines},
            {"loss", std::string(to_string(c.loss))},
            {"lambda", c.lambda},
            {"transmitter", c.transmitter},
            {"model", to_json(c.model)},
            {"phases", phases}};
  if (c.synth) j["synth"] = to_json(*c.synth);
  if (c.data) {
    j["data"] = {{"high", c.data->high.string()},
                 {"low", c.data->low.string()},
                 {"labels", c.data->labels.string()}};
  }
  return j;
}

RunConfig validate_config(const json& doc) {
  check_against(doc, schema(), "");
  RunConfig c;
  c.seed = doc.value("seed", c.seed);
  c.out_dir = doc.value("out_dir", c.out_dir);
  c.repeats = doc.value("repeats", c.repeats);
  c.train_fraction = doc.value("train_fraction", c.train_fraction);
  c.standardize = doc.value("standardize", c.standardize);
  c.baselines = doc.value("baselines", c.baselines);
  if (doc.contains("loss")) {
    try {
      c.loss = parse_clr_kind(doc.at("loss").get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("loss: ") + e.what());
    }
  }
  c.lambda = doc.value("lambda", c.lambda);
  c.transmitter = doc.value("transmitter", c.transmitter);
  if (doc.contains("model")) c.model = model_config_from_json(doc.at("model"));
  if (doc.contains("phases")) {
    for (Phase phase : kPhases) {
      const std::string key = phase_key(phase);
      if (doc.at("phases").contains(key)) c.plan(phase) = plan_from_json(doc.at("phases").at(key), phase);
    }
  }
  if (doc.contains("data")) {
    const json& d = doc.at("data");
    c.data = DataPaths{d.value("high", std::string()), d.value("low", std::string()),
                       d.value("labels", std::string())};
  }
  if (doc.contains("synth") || !doc.contains("data")) {
    json s = doc.value("synth", json::object());
    if (!s.contains("seed")) s["seed"] = c.seed;
    try {
      c.synth = synth_spec_from_json(s);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("synth: ") + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return validate_config(doc);
}

}  // namespace cleit
