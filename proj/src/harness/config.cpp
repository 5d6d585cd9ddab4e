// Copyright 2026 The HDF Authors.
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

#include "hdf/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hdf::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": cannot parse '" + v + "' as a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) out += v[i];
    else out += fmt(v[i]);
  }
  return out;
}

struct Entry {
  std::string key;
  std::string doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Two-level pointer-to-member accessors keep the table below one line per key.
template <typename Section, typename Field>
Entry num(std::string key, std::string doc, Section RunConfig::*sec, Field Section::*field) {
  return {key, std::move(doc),
          [=](RunConfig& c, const std::string& v) { c.*sec.*field = parse_number<Field>(key, v); },
          [=](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<Field>) return fmt(static_cast<double>(c.*sec.*field));
            else return std::to_string(c.*sec.*field);
          }};
}

template <typename Section>
Entry flag(std::string key, std::string doc, Section RunConfig::*sec, bool Section::*field) {
  return {key, std::move(doc), [=](RunConfig& c, const std::string& v) { c.*sec.*field = parse_bool(key, v); },
          [=](const RunConfig& c) { return fmt(c.*sec.*field); }};
}

template <typename Section>
Entry text(std::string key, std::string doc, Section RunConfig::*sec, std::string Section::*field) {
  return {key, std::move(doc), [=](RunConfig& c, const std::string& v) { c.*sec.*field = v; },
          [=](const RunConfig& c) { return c.*sec.*field; }};
}

const std::vector<Entry>& entries() {
  using S = SyntheticSpec;
  using M = model::ModelConfig;
  using D = dsm::DsmConfig;
  using O = OptimConfig;
  using TR = TrainConfig;
  using L = LandscapeConfig;
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(num("data.num_classes", "number of classes", &RunConfig::data, &S::num_classes));
    t.push_back(num("data.train_per_class", "training clips per class at ratio 1", &RunConfig::data, &S::train_per_class));
    t.push_back(num("data.test_per_class", "test clips per class at ratio 1", &RunConfig::data, &S::test_per_class));
    t.push_back({"data.class_ratios", "comma-separated relative class frequencies in (0, 1]; empty = balanced",
                 [](RunConfig& c, const std::string& v) {
                   c.data.class_ratios.clear();
                   for (const auto& s : split_list(v)) c.data.class_ratios.push_back(parse_number<double>("data.class_ratios", s));
                 },
                 [](const RunConfig& c) { return fmt_list(c.data.class_ratios); }});
    t.push_back(num("data.frames", "frames per clip", &RunConfig::data, &S::frames));
    t.push_back(num("data.channels", "channels per frame", &RunConfig::data, &S::channels));
    t.push_back(num("data.height", "frame height", &RunConfig::data, &S::height));
    t.push_back(num("data.width", "frame width", &RunConfig::data, &S::width));
    t.push_back(num("data.num_sources", "number of style sources", &RunConfig::data, &S::num_sources));
    t.push_back(num("data.contrast_shift", "max per-source contrast deviation from 1", &RunConfig::data, &S::contrast_shift));
    t.push_back(num("data.brightness_shift", "max per-source brightness offset", &RunConfig::data, &S::brightness_shift));
    t.push_back(num("data.noise_shift", "max per-source extra noise std", &RunConfig::data, &S::noise_shift));
    t.push_back(num("data.noise_base", "noise std shared by all sources", &RunConfig::data, &S::noise_base));
    t.push_back(num("data.temporal_drift", "time-warp strength in [0, 1]", &RunConfig::data, &S::temporal_drift));
    t.push_back(num("data.hard_fraction", "fraction of hard samples", &RunConfig::data, &S::hard_fraction));
    t.push_back(num("data.hard_gain", "style/warp multiplier for hard samples", &RunConfig::data, &S::hard_gain));
    t.push_back(num("data.seed", "dataset seed", &RunConfig::data, &S::seed));

    t.push_back({"model.backbone", "tiny3dconv | identity",
                 [](RunConfig& c, const std::string& v) { c.model.backbone = model::parse_backbone(v); },
                 [](const RunConfig& c) { return model::to_string(c.model.backbone); }});
    t.push_back(num("model.channels", "first-stage backbone width (doubles per stage)", &RunConfig::model, &M::channels));
    t.push_back(num("model.stages", "backbone stages, each halving H and W", &RunConfig::model, &M::stages));
    t.push_back(num("model.temporal_stride", "temporal stride of every backbone stage", &RunConfig::model, &M::temporal_stride));
    t.push_back(flag("model.backbone_norm", "clip-level normalization after every backbone conv", &RunConfig::model, &M::backbone_norm));
    t.push_back(num("model.num_classes", "classifier outputs; must equal data.num_classes", &RunConfig::model, &M::num_classes));
    t.push_back(num("model.embed_dim", "embedding dimension of the projection head", &RunConfig::model, &M::embed_dim));
    t.push_back(flag("model.embed_head", "projection head present (train.setting=custom only)", &RunConfig::model, &M::embed_head));
    t.push_back(flag("model.dam_enabled", "attention module on (train.setting=custom only)", &RunConfig::model, &M::dam_enabled));
    t.push_back(flag("model.freq_enabled", "frequency branch on (train.setting=custom only)", &RunConfig::model, &M::freq_enabled));
    t.push_back(flag("model.temporal_enabled", "temporal branch on (train.setting=custom only)", &RunConfig::model, &M::temporal_enabled));
    t.push_back({"model.fusion_norm", "renormalize | softmax",
                 [](RunConfig& c, const std::string& v) { c.model.fusion_norm = model::parse_fusion_norm(v); },
                 [](const RunConfig& c) { return model::to_string(c.model.fusion_norm); }});
    t.push_back({"model.variance_axes", "dynamic-fitting variance per frame | sample",
                 [](RunConfig& c, const std::string& v) { c.model.variance_axes = model::parse_variance_axes(v); },
                 [](const RunConfig& c) { return model::to_string(c.model.variance_axes); }});
    t.push_back(num("model.epsilon_adv", "frequency perturbation budget", &RunConfig::model, &M::epsilon_adv));

    t.push_back(num("dsm.tau", "contrastive temperature", &RunConfig::dsm, &D::tau));
    t.push_back(num("dsm.eta", "Gaussian weight center and width", &RunConfig::dsm, &D::eta));
    t.push_back(num("dsm.beta_ib", "covariance-trace coefficient", &RunConfig::dsm, &D::beta_ib));
    t.push_back(num("dsm.alpha_base", "base scale of the CE weight", &RunConfig::dsm, &D::alpha_base));
    t.push_back(num("dsm.beta_base", "base scale of the contrastive weight", &RunConfig::dsm, &D::beta_base));
    t.push_back(flag("dsm.uniform_weights", "w = 1 (plain supervised contrastive loss)", &RunConfig::dsm, &D::uniform_weights));
    t.push_back(flag("dsm.differentiable_weights", "backpropagate through the Gaussian weights", &RunConfig::dsm, &D::differentiable_weights));

    t.push_back(num("optim.lr", "peak learning rate", &RunConfig::optim, &O::lr));
    t.push_back(num("optim.min_lr", "final learning rate of the cosine schedule", &RunConfig::optim, &O::min_lr));
    t.push_back(num("optim.weight_decay", "decoupled weight decay", &RunConfig::optim, &O::weight_decay));
    t.push_back(num("optim.beta1", "AdamW first-moment decay", &RunConfig::optim, &O::beta1));
    t.push_back(num("optim.beta2", "AdamW second-moment decay", &RunConfig::optim, &O::beta2));
    t.push_back(num("optim.eps", "AdamW denominator floor", &RunConfig::optim, &O::eps));
    t.push_back(num("optim.warmup_epochs", "linear warm-up epochs", &RunConfig::optim, &O::warmup_epochs));
    t.push_back(num("optim.epochs", "total epochs", &RunConfig::optim, &O::epochs));

    t.push_back(num("train.batch_size", "clips per step", &RunConfig::train, &TR::batch_size));
    t.push_back(num("train.seed", "initialization and shuffling seed", &RunConfig::train, &TR::seed));
    t.push_back(text("train.setting", "a | b | c | d | freq | time | custom", &RunConfig::train, &TR::setting));

    t.push_back(num("landscape.extent", "grid spans [-extent, extent] along both directions", &RunConfig::landscape, &L::extent));
    t.push_back(num("landscape.resolution", "grid points per axis (odd keeps the center on the grid)", &RunConfig::landscape, &L::resolution));
    t.push_back(num("landscape.batch", "clips in the fixed evaluation batch", &RunConfig::landscape, &L::batch));
    t.push_back(num("landscape.seed", "direction seed", &RunConfig::landscape, &L::seed));
    t.push_back(text("landscape.loss", "ce | total", &RunConfig::landscape, &L::loss));

    t.push_back({"ablate.seeds", "comma-separated training seeds",
                 [](RunConfig& c, const std::string& v) {
                   c.ablate.seeds.clear();
                   for (const auto& s : split_list(v)) c.ablate.seeds.push_back(parse_number<std::uint64_t>("ablate.seeds", s));
                 },
                 [](const RunConfig& c) { return fmt_list(c.ablate.seeds); }});
    t.push_back({"ablate.settings", "comma-separated settings to run",
                 [](RunConfig& c, const std::string& v) { c.ablate.settings = split_list(v); },
                 [](const RunConfig& c) { return fmt_list(c.ablate.settings); }});
    return t;
  }();
  return table;
}

const Entry& find(const std::string& key) {
  for (const auto& e : entries())
    if (e.key == key) return e;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  try {
    data.validate();
    model_for_data().validate();
    dsm.validate();
    optim.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (train.batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  static const std::set<std::string> settings{"a", "b", "c", "d", "freq", "time", "custom"};
  if (!settings.count(train.setting)) throw ConfigError("train.setting: unknown value '" + train.setting + "'");
  if (!(landscape.extent > 0)) throw ConfigError("landscape.extent must be > 0");
  if (landscape.resolution < 2) throw ConfigError("landscape.resolution must be >= 2");
  if (landscape.batch < 2) throw ConfigError("landscape.batch must be >= 2");
  if (landscape.loss != "ce" && landscape.loss != "total") throw ConfigError("landscape.loss must be ce or total");
  if (ablate.seeds.empty()) throw ConfigError("ablate.seeds must not be empty");
  for (const auto& s : ablate.settings)
    if (!settings.count(s) || s == "custom") throw ConfigError("ablate.settings: unknown value '" + s + "'");
}

model::ModelConfig RunConfig::model_for_data() const {
  if (model.num_classes != data.num_classes) {
    throw ConfigError("model.num_classes (" + std::to_string(model.num_classes) + ") differs from data.num_classes (" +
                      std::to_string(data.num_classes) + ")");
  }
  model::ModelConfig m = model;
  m.frames = data.frames;
  m.in_channels = data.channels;
  m.height = data.height;
  m.width = data.width;
  return m;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    const RunConfig defaults;
    for (const auto& e : entries()) out.push_back({e.key, e.get(defaults), e.doc});
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    find(key).set(cfg, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find(key).get(cfg); }

RunConfig parse_config(const std::string& text, RunConfig base, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      set_config_value(base, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base), path.string());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& e : entries()) {
    const std::string sec = e.key.substr(0, e.key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += "\n";
      section = sec;
    }
    out += "# " + e.doc + "\n" + e.key + " = " + e.get(cfg) + "\n";
  }
  return out;
}

}  // namespace hdf::harness
