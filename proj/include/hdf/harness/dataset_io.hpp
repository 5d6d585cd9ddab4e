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

#pragma once

#include <filesystem>

#include <json.hpp>

#include "hdf/harness/synthetic.hpp"

// On-disk dataset: a directory holding manifest.json (spec, seed, shapes,
// FNV-1a checksums) and one raw little-endian file per array and split.

namespace hdf::harness {

inline constexpr int kDatasetVersion = 1;

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

struct DatasetBundle {
  SyntheticSpec spec;
  Dataset train;
  Dataset test;
};

DatasetBundle generate_bundle(const SyntheticSpec& spec);
void write_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle);
/// Verifies every checksum; throws std::runtime_error on mismatch.
DatasetBundle read_dataset(const std::filesystem::path& dir);

}  // namespace hdf::harness
