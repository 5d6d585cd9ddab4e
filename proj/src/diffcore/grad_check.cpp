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

#include "hdf/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace hdf::ad {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

namespace {

double evaluate(const Objective& objective) {
  Graph<double> g(false);
  return objective(g).item();
}

}  // namespace

GradCheckReport grad_check(ParameterSet<double>& params, const Objective& objective, double tolerance,
                           const GradCheckOptions& options) {
  params.zero_grad();
  {
    Graph<double> g;
    Var<double> out = objective(g);
    g.backward(out);
  }
  GradCheckReport report;
  report.tolerance = tolerance;
  const std::size_t stride = std::max<std::size_t>(1, options.stride);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter<double>& param = params[p];
    GradCheckEntry entry;
    entry.name = param.name;
    for (std::size_t i = 0; i < param.value.size(); i += stride) {
      const double saved = param.value[i];
      param.value[i] = saved + options.step;
      const double up = evaluate(objective);
      param.value[i] = saved - options.step;
      const double down = evaluate(objective);
      param.value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = param.grad[i];
      const double abs_err = std::abs(analytic - numeric);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, abs_err / denom);
      ++entry.checked;
    }
    entry.passed = entry.max_rel_error < tolerance;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace hdf::ad
