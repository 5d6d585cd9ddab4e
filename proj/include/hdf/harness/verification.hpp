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
#include <vector>

#include "hdf/diffcore/grad_check.hpp"

// Finite-difference verification of the analytic gradients, from single
// operators up to the full toy model. Backs `hdf grad-check`.

namespace hdf::harness {

struct SuiteOptions {
  std::size_t instances = 5;
  std::uint64_t seed = 1;
  double tolerance = 1e-4;
  /// Empty runs every case.
  std::vector<std::string> only;
};

struct SuiteCase {
  std::string name;
  std::size_t instances = 0;
  std::size_t checked = 0;  // gradient elements compared
  double max_rel_error = 0;
  bool passed = true;
};

const std::vector<std::string>& gradient_case_names();

/// Throws std::invalid_argument for an unknown name in options.only.
std::vector<SuiteCase> run_gradient_suite(const SuiteOptions& options);

}  // namespace hdf::harness
