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

#include "hdf/harness/dataset_io.hpp"

#include <fstream>

#include "../common/le_io.hpp"

namespace hdf::harness {

namespace fs = std::filesystem;

nlohmann::json to_json(const SyntheticSpec& s) {
  return {
      {"num_classes", s.num_classes},       {"train_per_class", s.train_per_class},
      {"test_per_class", s.test_per_class}, {"class_ratios", s.class_ratios},
      {"frames", s.frames},                 {"channels", s.channels},
      {"height", s.height},                 {"width", s.width},
      {"num_sources", s.num_sources},       {"contrast_shift", s.contrast_shift},
      {"brightness_shift", s.brightness_shift}, {"noise_shift", s.noise_shift},
      {"noise_base", s.noise_base},         {"temporal_drift", s.temporal_drift},
      {"hard_fraction", s.hard_fraction},   {"hard_gain", s.hard_gain},
      {"seed", s.seed},
  };
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  j.at("num_classes").get_to(s.num_classes);
  j.at("train_per_class").get_to(s.train_per_class);
  j.at("test_per_class").get_to(s.test_per_class);
  j.at("class_ratios").get_to(s.class_ratios);
  j.at("frames").get_to(s.frames);
  j.at("channels").get_to(s.channels);
  j.at("height").get_to(s.height);
  j.at("width").get_to(s.width);
  j.at("num_sources").get_to(s.num_sources);
  j.at("contrast_shift").get_to(s.contrast_shift);
  j.at("brightness_shift").get_to(s.brightness_shift);
  j.at("noise_shift").get_to(s.noise_shift);
  j.at("noise_base").get_to(s.noise_base);
  j.at("temporal_drift").get_to(s.temporal_drift);
  j.at("hard_fraction").get_to(s.hard_fraction);
  j.at("hard_gain").get_to(s.hard_gain);
  j.at("seed").get_to(s.seed);
  s.validate();
  return s;
}

DatasetBundle generate_bundle(const SyntheticSpec& spec) {
  return DatasetBundle{spec, generate(spec, Split::kTrain), generate(spec, Split::kTest)};
}

namespace {

template <typename T>
nlohmann::json write_array(const fs::path& dir, const std::string& file, const std::vector<T>& v) {
  std::ofstream os(dir / file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
  io::write_le(os, v.data(), v.size());
  if (!os) throw std::runtime_error("failed writing " + (dir / file).string());
  return {{"file", file}, {"count", v.size()}, {"fnv1a", io::hex64(io::fnv1a_bytes(v.data(), v.size() * sizeof(T)))}};
}

template <typename T>
std::vector<T> read_array(const fs::path& dir, const nlohmann::json& entry, std::size_t expect) {
  const std::string file = entry.at("file").get<std::string>();
  const std::size_t count = entry.at("count").get<std::size_t>();
  if (count != expect) throw std::runtime_error(file + ": expected " + std::to_string(expect) + " values, manifest says " + std::to_string(count));
  std::ifstream is(dir / file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + (dir / file).string());
  std::vector<T> v(count);
  io::read_le(is, v.data(), count, file);
  // Checksums cover the little-endian byte image; compare in that form.
  std::vector<T> le(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) le[i] = io::byteswap_if_big(v[i]);
  const std::string sum = io::hex64(io::fnv1a_bytes(le.data(), le.size() * sizeof(T)));
  if (sum != entry.at("fnv1a").get<std::string>()) throw std::runtime_error(file + ": checksum mismatch");
  return v;
}

nlohmann::json write_split(const fs::path& dir, const std::string& name, const Dataset& d) {
  std::vector<std::int32_t> labels(d.labels.begin(), d.labels.end());
  std::vector<std::int32_t> sources(d.sources.begin(), d.sources.end());
  return {
      {"samples", d.size()},
      {"shape", {d.size(), d.frames, d.channels, d.height, d.width}},
      {"videos", write_array(dir, name + "_videos.f32", d.videos)},
      {"labels", write_array(dir, name + "_labels.i32", labels)},
      {"sources", write_array(dir, name + "_sources.i32", sources)},
      {"hard", write_array(dir, name + "_hard.u8", d.hard)},
  };
}

Dataset read_split(const fs::path& dir, const nlohmann::json& j) {
  Dataset d;
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 5) throw std::runtime_error("dataset manifest: shape must have 5 entries");
  const std::size_t n = shape[0];
  d.frames = shape[1];
  d.channels = shape[2];
  d.height = shape[3];
  d.width = shape[4];
  d.videos = read_array<float>(dir, j.at("videos"), n * d.sample_numel());
  const auto labels = read_array<std::int32_t>(dir, j.at("labels"), n);
  const auto sources = read_array<std::int32_t>(dir, j.at("sources"), n);
  d.labels.assign(labels.begin(), labels.end());
  d.sources.assign(sources.begin(), sources.end());
  d.hard = read_array<std::uint8_t>(dir, j.at("hard"), n);
  return d;
}

}  // namespace

void write_dataset(const fs::path& dir, const DatasetBundle& b) {
  fs::create_directories(dir);
  const nlohmann::json manifest = {
      {"format", "hdf-dataset"},
      {"version", kDatasetVersion},
      {"spec", to_json(b.spec)},
      {"splits", {{"train", write_split(dir, "train", b.train)}, {"test", write_split(dir, "test", b.test)}}},
  };
  std::ofstream os(dir / "manifest.json", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  os << manifest.dump(2) << "\n";
}

DatasetBundle read_dataset(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("no manifest.json in " + dir.string());
  const nlohmann::json m = nlohmann::json::parse(is);
  if (m.value("format", "") != "hdf-dataset") throw std::runtime_error(dir.string() + ": not a dataset directory");
  if (m.at("version").get<int>() != kDatasetVersion) throw std::runtime_error(dir.string() + ": unsupported dataset version");
  DatasetBundle b;
  b.spec = synthetic_spec_from_json(m.at("spec"));
  b.train = read_split(dir, m.at("splits").at("train"));
  b.test = read_split(dir, m.at("splits").at("test"));
  return b;
}

}  // namespace hdf::harness
