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

#include "hdf/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hdf::dsm {

using ad::Axes;
using ad::Shape;

void DsmConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("dsm: " + what); };
  if (!(tau > 0)) fail("tau must be > 0");
  if (!(eta > 0)) fail("eta must be > 0");
  if (!(beta_ib >= 0)) fail("beta_ib must be >= 0");
  if (!(alpha_base > 0)) fail("alpha_base must be > 0");
  if (!(beta_base > 0)) fail("beta_base must be > 0");
}

ScalingState initial_scaling(const DsmConfig& cfg) { return update_scaling(ScalingState{}, 1.0, cfg); }

ScalingState update_scaling(const ScalingState&, double grad_norm_prev, const DsmConfig& cfg) {
  if (!std::isfinite(grad_norm_prev) || grad_norm_prev < 0) {
    throw std::invalid_argument("update_scaling: gradient norm must be finite and >= 0, got " +
                                std::to_string(grad_norm_prev));
  }
  ScalingState s;
  s.g = grad_norm_prev;
  s.lambda_ce = grad_norm_prev / (grad_norm_prev + 1.0) * cfg.alpha_base;
  s.lambda_sc = 1.0 / (grad_norm_prev + 1.0) * cfg.beta_base;
  return s;
}

namespace {

template <typename T>
void check_batch(const Var<T>& z, const std::vector<int>& labels, const char* op) {
  if (z.shape().size() != 2) throw ad::ShapeError(op, "expected [N,d], got " + ad::to_string(z.shape()));
  if (labels.size() != z.shape()[0]) {
    throw ad::ShapeError(op, std::to_string(labels.size()) + " labels for " + std::to_string(z.shape()[0]) + " rows");
  }
}

// Shared body of scl/dsc: per anchor, logsumexp over a != i of logits[i, a]
// minus the mean positive similarity.
template <typename T>
ContrastiveResult<T> contrastive(const Var<T>& s, const Var<T>& logits, const std::vector<int>& labels) {
  ad::Graph<T>& g = *s.graph();
  const std::size_t n = labels.size();
  std::vector<std::size_t> positives(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && labels[i] == labels[j]) ++positives[i];

  ContrastiveResult<T> r;
  for (std::size_t p : positives) r.anchors += p > 0 ? 1 : 0;
  if (r.anchors == 0) {
    r.degenerate = true;
    r.loss = g.constant(Tensor<T>::scalar(T(0)));
    return r;
  }

  Tensor<T> off(Shape{n, n});
  Tensor<T> shift(Shape{n, 1});
  Tensor<T> anchor_w(Shape{n, 1});
  Tensor<T> pos_w(Shape{n, n});
  const Tensor<T>& lv = logits.value();
  for (std::size_t i = 0; i < n; ++i) {
    T m = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      off[i * n + j] = T(1);
      m = std::max(m, lv[i * n + j]);
      if (positives[i] > 0 && labels[i] == labels[j]) {
        pos_w[i * n + j] = static_cast<T>(1.0 / (static_cast<double>(positives[i]) * static_cast<double>(r.anchors)));
      }
    }
    // n == 1 never reaches here: it has no positives.
    shift[i] = m;
    if (positives[i] > 0) anchor_w[i] = static_cast<T>(1.0 / static_cast<double>(r.anchors));
  }
  const Var<T> m = g.constant(std::move(shift));
  const Var<T> lse = ad::log(ad::sum(ad::exp(logits - m) * g.constant(std::move(off)), Axes{1}, true)) + m;
  const Var<T> denom_term = ad::sum_all(lse * g.constant(std::move(anchor_w)));
  const Var<T> pos_term = ad::sum_all(s * g.constant(std::move(pos_w)));
  r.loss = denom_term - pos_term;
  return r;
}

}  // namespace

template <typename T>
Var<T> similarity(const Var<T>& z, double tau) {
  return ad::matmul(z, z, false, true) * static_cast<T>(1.0 / tau);
}

template <typename T>
Var<T> gaussian_log_weights(const Var<T>& s, double eta) {
  return ad::square(s - static_cast<T>(eta)) * static_cast<T>(-1.0 / (2.0 * eta * eta));
}

template <typename T>
Var<T> gaussian_weights(const Var<T>& s, double eta) {
  return ad::exp(gaussian_log_weights(s, eta));
}

template <typename T>
ContrastiveResult<T> scl_loss(const Var<T>& z, const std::vector<int>& labels, double tau) {
  check_batch(z, labels, "scl_loss");
  const Var<T> s = similarity(z, tau);
  return contrastive(s, s, labels);
}

template <typename T>
ContrastiveResult<T> dsc_loss(const Var<T>& z, const std::vector<int>& labels, const DsmConfig& cfg) {
  check_batch(z, labels, "dsc_loss");
  const Var<T> s = similarity(z, cfg.tau);
  if (cfg.uniform_weights) return contrastive(s, s, labels);
  const Var<T> logw = gaussian_log_weights(cfg.differentiable_weights ? s : ad::detach(s), cfg.eta);
  return contrastive(s, s + logw, labels);
}

template <typename T>
ContrastiveResult<T> dsc_loss_fixed(const Var<T>& z, const std::vector<int>& labels, double tau,
                                    const Tensor<T>& log_weights) {
  check_batch(z, labels, "dsc_loss_fixed");
  const Var<T> s = similarity(z, tau);
  if (log_weights.shape() != s.shape()) {
    throw ad::ShapeError("dsc_loss_fixed", "log weights " + ad::to_string(log_weights.shape()) + " for similarity " +
                                               ad::to_string(s.shape()));
  }
  return contrastive(s, s + z.graph()->constant(log_weights), labels);
}

template <typename T>
Var<T> ib_penalty(const Var<T>& z) {
  if (z.shape().size() != 2) throw ad::ShapeError("ib_penalty", "expected [N,d], got " + ad::to_string(z.shape()));
  const Var<T> centered = z - ad::mean(z, Axes{0}, true);
  return ad::sum_all(ad::square(centered)) * static_cast<T>(1.0 / static_cast<double>(z.shape()[0]));
}

template <typename T>
ContrastiveResult<T> ib_dsc_loss(const Var<T>& z, const std::vector<int>& labels, const DsmConfig& cfg) {
  ContrastiveResult<T> r = dsc_loss(z, labels, cfg);
  r.loss = r.loss + ib_penalty(z) * static_cast<T>(cfg.beta_ib);
  return r;
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<int>& labels) {
  if (logits.shape().size() != 2 || labels.size() != logits.shape()[0]) {
    throw ad::ShapeError("cross_entropy", "logits " + ad::to_string(logits.shape()) + " with " +
                                              std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = logits.shape()[0], k = logits.shape()[1];
  Tensor<T> pick(Shape{b, k});
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(k) + ")");
    }
    pick[i * k + static_cast<std::size_t>(labels[i])] = static_cast<T>(-1.0 / static_cast<double>(b));
  }
  return ad::sum_all(ad::log_softmax(logits, 1) * logits.graph()->constant(std::move(pick)));
}

template <typename T>
Var<T> total_loss(const Var<T>& ce, const Var<T>& ibdsc, const ScalingState& state) {
  return ce * static_cast<T>(state.lambda_ce) + ibdsc * static_cast<T>(state.lambda_sc);
}

#define HDF_INSTANTIATE_DSM(T)                                                                         \
  template Var<T> similarity(const Var<T>&, double);                                                   \
  template Var<T> gaussian_log_weights(const Var<T>&, double);                                         \
  template Var<T> gaussian_weights(const Var<T>&, double);                                             \
  template ContrastiveResult<T> scl_loss(const Var<T>&, const std::vector<int>&, double);              \
  template ContrastiveResult<T> dsc_loss(const Var<T>&, const std::vector<int>&, const DsmConfig&);    \
  template ContrastiveResult<T> dsc_loss_fixed(const Var<T>&, const std::vector<int>&, double, const Tensor<T>&); \
  template Var<T> ib_penalty(const Var<T>&);                                                           \
  template ContrastiveResult<T> ib_dsc_loss(const Var<T>&, const std::vector<int>&, const DsmConfig&); \
  template Var<T> cross_entropy(const Var<T>&, const std::vector<int>&);                               \
  template Var<T> total_loss(const Var<T>&, const Var<T>&, const ScalingState&);

HDF_INSTANTIATE_DSM(float)
HDF_INSTANTIATE_DSM(double)

}  // namespace hdf::dsm
