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

#include <vector>

#include "hdf/harness/config.hpp"

// Two-dimensional loss slices around a trained point along two fixed random
// directions, each rescaled per filter to the norm of the weights it moves.

namespace hdf::harness {

struct LandscapePoint {
  std::size_t i = 0, j = 0;
  double alpha = 0, beta = 0;
  double loss = 0;
};

struct LandscapeResult {
  std::size_t resolution = 0;
  double extent = 0;
  double center_loss = 0;  // loss at zero displacement
  /// Mean loss increase over 16 directions at unit radius.
  double flatness = 0;
  std::vector<LandscapePoint> points;  // row-major, resolution^2 entries
};

/// Filter-normalized random direction: for tensors of rank >= 2 each slice
/// along axis 0 is scaled to the norm of the matching weight slice; biases
/// and rank <= 1 tensors are left fixed (zero direction).
std::vector<std::vector<double>> filter_normalized_direction(const ad::ParameterSet<float>& params, std::uint64_t seed,
                                                             const std::string& stream);

/// Evaluation batch: `count` indices spread evenly over the dataset.
std::vector<std::size_t> spread_indices(std::size_t n, std::size_t count);

LandscapeResult landscape_slice(const model::ModelConfig& mcfg, const ad::ParameterSet<float>& params,
                                const model::Variant& variant, const RunConfig& cfg, const Dataset& data);

}  // namespace hdf::harness
