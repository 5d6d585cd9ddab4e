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

#include <cstdint>
#include <string>
#include <vector>

#include "hdf/diffcore/tensor.hpp"

// Synthetic heterogeneous clip generator. Each class is a moving blob with
// its own trajectory plus a drifting grating with its own frequency and
// orientation; sources apply contrast/brightness/noise styles; a smooth
// monotone time warp perturbs the dynamics; hard samples get amplified
// style and warp but keep their label.

namespace hdf::harness {

struct SyntheticSpec {
  std::size_t num_classes = 4;
  std::size_t train_per_class = 150;
  std::size_t test_per_class = 50;
  /// Relative class frequencies; empty means balanced.
  std::vector<double> class_ratios;
  std::size_t frames = 8;
  std::size_t channels = 1;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t num_sources = 3;
  double contrast_shift = 0.4;
  double brightness_shift = 0.3;
  double noise_shift = 0.15;
  double noise_base = 0.1;
  double temporal_drift = 0.5;
  double hard_fraction = 0.2;
  /// Style and warp multiplier for hard samples.
  double hard_gain = 2.5;
  std::uint64_t seed = 2024;

  /// Throws std::invalid_argument on a degenerate spec.
  void validate() const;
  /// Per-class counts for a split with `per_class` samples at ratio 1.
  std::vector<std::size_t> class_counts(std::size_t per_class) const;
  bool operator==(const SyntheticSpec&) const = default;
};

struct SourceStyle {
  double contrast = 1.0;
  double brightness = 0.0;
  double noise = 0.0;
};

/// Style of source s; identity-plus-base-noise when all shifts are 0.
SourceStyle source_style(const SyntheticSpec& spec, std::size_t source);

enum class Split { kTrain, kTest };
std::string to_string(Split s);

struct SampleInfo {
  int label = 0;
  int source = 0;
  bool hard = false;
  double warp = 0.0;  // signed warp amplitude in (-1, 1)
};

struct Dataset {
  std::size_t frames = 0, channels = 0, height = 0, width = 0;
  std::vector<float> videos;  // [N, T, C, H, W]
  std::vector<int> labels;
  std::vector<int> sources;
  std::vector<std::uint8_t> hard;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_numel() const { return frames * channels * height * width; }
  /// Gathers the listed samples into a [n, T, C, H, W] batch.
  ad::Tensor<float> batch(const std::vector<std::size_t>& idx) const;
  std::vector<int> batch_labels(const std::vector<std::size_t>& idx) const;
};

/// Label/source/hardness of sample `index`, drawn from (seed, split, index).
SampleInfo sample_info(const SyntheticSpec& spec, Split split, std::size_t index);

/// Renders one clip [T, C, H, W]. `info` normally comes from sample_info.
std::vector<float> render_sample(const SyntheticSpec& spec, Split split, std::size_t index, const SampleInfo& info);

/// Monotone warp of u in [0, 1] with amplitude a in (-1, 1).
double time_warp(double u, double a);

Dataset generate(const SyntheticSpec& spec, Split split);

}  // namespace hdf::harness
