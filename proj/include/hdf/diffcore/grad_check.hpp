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

#include <functional>
#include <string>
#include <vector>

#include "hdf/diffcore/graph.hpp"

namespace hdf::ad {

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor),
  /// so vanishing gradients are compared in absolute terms.
  double floor = 1e-6;
  /// Check every k-th element of large parameters (1 = all).
  std::size_t stride = 1;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  bool passed() const;
  double max_rel_error() const;
};

using Objective = std::function<Var<double>(Graph<double>&)>;

/// Compares reverse-mode gradients of `objective` against central finite
/// differences for every element of every parameter. The objective must bind
/// parameters through Graph::parameter and be a pure function of their values.
GradCheckReport grad_check(ParameterSet<double>& params, const Objective& objective, double tolerance,
                           const GradCheckOptions& options = {});

}  // namespace hdf::ad
