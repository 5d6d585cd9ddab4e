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

#include <string>

#include "hdf/diffcore/ops.hpp"

namespace hdf::dam {

using ad::Graph;
using ad::ParameterSet;
using ad::Tensor;
using ad::Var;

enum class FusionNorm {
  kRenormalize,  // two sigmoids divided by their sum
  kSoftmax,      // softmax over the two logits
};

struct FusionConfig {
  std::size_t channels = 0;
  FusionNorm norm = FusionNorm::kRenormalize;
};

template <typename T>
struct FusionParams {
  Var<T> w_t, w_s;  // [C, 1]
  Var<T> b_t, b_s;  // [1]
};

template <typename T>
struct FusionState {
  Var<T> lambda_t, lambda_s;  // [B]
  Var<T> x_fused;
};

/// Per-sample convex combination lambda_t * x_t + lambda_s * x_s with weights
/// gated on the (T, H, W)-pooled channel descriptors of each branch.
template <typename T>
FusionState<T> fuse(const Var<T>& x_t, const Var<T>& x_s, const FusionParams<T>& p,
                    FusionNorm norm = FusionNorm::kRenormalize);

/// All zeros, so both weights start at 0.5.
template <typename T>
void register_fusion_params(ParameterSet<T>& set, const std::string& prefix, const FusionConfig& cfg);

template <typename T>
FusionParams<T> bind_fusion_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix);

}  // namespace hdf::dam
