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

#include "hdf/checkpoint.hpp"

#include <fstream>

#include "../common/le_io.hpp"

namespace hdf::model {

namespace {

constexpr char kMagic[] = "HDFCKPT\n";

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"backbone", to_string(c.backbone)},
      {"frames", c.frames},
      {"in_channels", c.in_channels},
      {"height", c.height},
      {"width", c.width},
      {"channels", c.channels},
      {"stages", c.stages},
      {"temporal_stride", c.temporal_stride},
      {"backbone_norm", c.backbone_norm},
      {"num_classes", c.num_classes},
      {"embed_dim", c.embed_dim},
      {"embed_head", c.embed_head},
      {"dam_enabled", c.dam_enabled},
      {"freq_enabled", c.freq_enabled},
      {"temporal_enabled", c.temporal_enabled},
      {"fusion_norm", to_string(c.fusion_norm)},
      {"variance_axes", to_string(c.variance_axes)},
      {"epsilon_adv", c.epsilon_adv},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "backbone") c.backbone = parse_backbone(v.get<std::string>());
    else if (key == "frames") c.frames = v.get<std::size_t>();
    else if (key == "in_channels") c.in_channels = v.get<std::size_t>();
    else if (key == "height") c.height = v.get<std::size_t>();
    else if (key == "width") c.width = v.get<std::size_t>();
    else if (key == "channels") c.channels = v.get<std::size_t>();
    else if (key == "stages") c.stages = v.get<std::size_t>();
    else if (key == "temporal_stride") c.temporal_stride = v.get<std::size_t>();
    else if (key == "backbone_norm") c.backbone_norm = v.get<bool>();
    else if (key == "num_classes") c.num_classes = v.get<std::size_t>();
    else if (key == "embed_dim") c.embed_dim = v.get<std::size_t>();
    else if (key == "embed_head") c.embed_head = v.get<bool>();
    else if (key == "dam_enabled") c.dam_enabled = v.get<bool>();
    else if (key == "freq_enabled") c.freq_enabled = v.get<bool>();
    else if (key == "temporal_enabled") c.temporal_enabled = v.get<bool>();
    else if (key == "fusion_norm") c.fusion_norm = parse_fusion_norm(v.get<std::string>());
    else if (key == "variance_axes") c.variance_axes = parse_variance_axes(v.get<std::string>());
    else if (key == "epsilon_adv") c.epsilon_adv = v.get<double>();
    else throw std::invalid_argument("model config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, const ParameterSet<float>& params,
                     const nlohmann::json& meta) {
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    table.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}});
    offset += p.value.size();
  }
  const nlohmann::json header = {
      {"version", kCheckpointVersion}, {"model", to_json(cfg)}, {"params", table}, {"elements", offset}, {"meta", meta}};
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic) - 1);
  const std::uint64_t len = text.size();
  io::write_le(os, &len, 1);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < params.size(); ++i) io::write_le(os, params[i].value.data(), params[i].value.size());
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  char magic[sizeof(kMagic) - 1];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) || std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(magic))) {
    throw std::runtime_error(what + ": not a checkpoint file");
  }
  std::uint64_t len = 0;
  io::read_le(is, &len, 1, what);
  if (len > (1u << 26)) throw std::runtime_error(what + ": implausible header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(is.gcount()) != len) throw std::runtime_error(what + ": truncated header");
  const nlohmann::json header = nlohmann::json::parse(text);
  if (header.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error(what + ": unsupported version " + header.at("version").dump());
  }
  Checkpoint ck;
  ck.model = model_config_from_json(header.at("model"));
  ck.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("params")) {
    Tensor<float> value(entry.at("shape").get<Shape>());
    io::read_le(is, value.data(), value.size(), what);
    ck.params.add(entry.at("name").get<std::string>(), std::move(value));
  }
  // Validates names and shapes against the config.
  Model<float> check(ck.model, ck.params);
  return ck;
}

}  // namespace hdf::model
