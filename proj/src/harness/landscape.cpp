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

#include "hdf/harness/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdf/diffcore/init.hpp"
#include "hdf/harness/train.hpp"

namespace hdf::harness {

std::vector<std::vector<double>> filter_normalized_direction(const ad::ParameterSet<float>& params, std::uint64_t seed,
                                                             const std::string& stream) {
  std::vector<std::vector<double>> dir(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto& prm = params[p];
    dir[p].assign(prm.value.size(), 0.0);
    if (prm.value.rank() < 2 || prm.name.ends_with("bias")) continue;
    ad::Rng rng(seed, stream + "/" + prm.name);
    for (double& v : dir[p]) v = rng.normal();
    const std::size_t rows = prm.value.shape()[0];
    const std::size_t width = prm.value.size() / rows;
    for (std::size_t r = 0; r < rows; ++r) {
      double wn = 0, dn = 0;
      for (std::size_t k = r * width; k < (r + 1) * width; ++k) {
        wn += static_cast<double>(prm.value[k]) * prm.value[k];
        dn += dir[p][k] * dir[p][k];
      }
      const double scale = dn > 0 ? std::sqrt(wn / dn) : 0.0;
      for (std::size_t k = r * width; k < (r + 1) * width; ++k) dir[p][k] *= scale;
    }
  }
  return dir;
}

std::vector<std::size_t> spread_indices(std::size_t n, std::size_t count) {
  count = std::min(count, n);
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i * n / count;
  return idx;
}

LandscapeResult landscape_slice(const model::ModelConfig& mcfg, const ad::ParameterSet<float>& params,
                                const model::Variant& variant, const RunConfig& cfg, const Dataset& data) {
  const auto& lc = cfg.landscape;
  const auto d1 = filter_normalized_direction(params, lc.seed, "direction1");
  const auto d2 = filter_normalized_direction(params, lc.seed, "direction2");
  model::Model<float> m(mcfg, params);
  const auto idx = spread_indices(data.size(), lc.batch);
  const ad::Tensor<float> x = data.batch(idx);
  const std::vector<int> labels = data.batch_labels(idx);
  const bool total = lc.loss == "total";
  const dsm::ScalingState scaling = initial_scaling(cfg.dsm);

  auto loss_at = [&](double a, double b) {
    auto& ps = m.params();
    for (std::size_t p = 0; p < ps.size(); ++p) {
      for (std::size_t k = 0; k < ps[p].value.size(); ++k) {
        ps[p].value[k] = static_cast<float>(static_cast<double>(params[p].value[k]) + a * d1[p][k] + b * d2[p][k]);
      }
    }
    ad::Graph<float> g(false);
    const LossParts parts = training_loss(m, g, x, labels, variant, cfg.dsm, scaling);
    return static_cast<double>(total ? parts.total.item() : parts.ce.item());
  };

  LandscapeResult res;
  res.resolution = lc.resolution;
  res.extent = lc.extent;
  res.center_loss = loss_at(0.0, 0.0);
  const double denom = static_cast<double>(lc.resolution - 1);
  for (std::size_t i = 0; i < lc.resolution; ++i) {
    for (std::size_t j = 0; j < lc.resolution; ++j) {
      LandscapePoint pt;
      pt.i = i;
      pt.j = j;
      // 2i - (r - 1) is exactly zero at the center for odd r.
      pt.alpha = lc.extent * (2.0 * static_cast<double>(i) - denom) / denom;
      pt.beta = lc.extent * (2.0 * static_cast<double>(j) - denom) / denom;
      pt.loss = loss_at(pt.alpha, pt.beta);
      res.points.push_back(pt);
    }
  }
  constexpr int kAngles = 16;
  double rise = 0;
  for (int k = 0; k < kAngles; ++k) {
    const double phi = 2 * std::numbers::pi * k / kAngles;
    rise += loss_at(std::cos(phi), std::sin(phi)) - res.center_loss;
  }
  res.flatness = rise / kAngles;
  return res;
}

}  // namespace hdf::harness
