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

#include "hdf/dam/temporal.hpp"

#include <cmath>
#include <tuple>

namespace hdf::dam {

using ad::Axes;
using ad::Shape;

namespace {

template <typename T>
void check_video(const Var<T>& x, const char* op) {
  if (x.shape().size() != 5) throw ad::ShapeError(op, "expected [B,T,C,H,W], got " + ad::to_string(x.shape()));
}

template <typename T>
void check_sequence(const Var<T>& a, const char* op) {
  if (a.shape().size() != 2) throw ad::ShapeError(op, "expected [B,T], got " + ad::to_string(a.shape()));
}

}  // namespace

template <typename T>
std::pair<Var<T>, Var<T>> descriptors(const Var<T>& x) {
  check_video(x, "descriptors");
  return {ad::mean(x, Axes{2, 3, 4}), ad::max(x, Axes{2, 3, 4})};
}

template <typename T>
std::pair<Var<T>, Var<T>> deviations(const Var<T>& a_avg) {
  check_sequence(a_avg, "deviations");
  const std::size_t b = a_avg.shape()[0], t = a_avg.shape()[1];
  Var<T> w_global = ad::abs(a_avg - ad::mean(a_avg, Axes{1}, true));
  Var<T> first = a_avg.graph()->constant(Tensor<T>(Shape{b, 1}));
  if (t == 1) return {w_global, first};
  Var<T> step = ad::abs(ad::slice(a_avg, 1, 1, t - 1) - ad::slice(a_avg, 1, 0, t - 1));
  return {w_global, ad::concat(std::vector<Var<T>>{first, step}, 1)};
}

template <typename T>
Var<T> zscore(const Var<T>& a) {
  check_sequence(a, "zscore");
  Graph<T>& g = *a.graph();
  const Var<T> var = ad::variance(a, Axes{1}, true);
  Tensor<T> keep(var.shape());
  Tensor<T> drop(var.shape());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const bool ok = std::sqrt(static_cast<double>(var.value()[i])) >= kZscoreGuard;
    keep[i] = ok ? T(1) : T(0);
    drop[i] = ok ? T(0) : T(1);
  }
  const Var<T> mask = g.constant(std::move(keep));
  // Swap guarded variances for 1 so neither sqrt nor its gradient blows up.
  const Var<T> safe = var * mask + g.constant(std::move(drop));
  return (a - ad::mean(a, Axes{1}, true)) / ad::sqrt(safe) * mask;
}

template <typename T>
Var<T> temporal_gate(const Var<T>& a_avg, const Var<T>& a_max, const Var<T>& w_global, const Var<T>& d_local,
                     const TemporalParams<T>& p) {
  const Var<T> pooled = p.alpha * zscore(a_avg) + p.beta * zscore(a_max);
  return ad::sigmoid(p.gamma * pooled + p.delta * w_global - d_local);
}

template <typename T>
Var<T> temporal_attention(const Var<T>& tokens, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv) {
  if (tokens.shape().size() != 3) throw ad::ShapeError("temporal_attention", "expected [B,T,C], got " + ad::to_string(tokens.shape()));
  const std::size_t b = tokens.shape()[0], t = tokens.shape()[1], c = tokens.shape()[2];
  const Var<T> q = ad::matmul(tokens, wq);
  const Var<T> k = ad::matmul(tokens, wk);
  const Var<T> v = ad::matmul(tokens, wv);
  const Var<T> scores = ad::matmul(q, k, false, true) * static_cast<T>(1.0 / std::sqrt(static_cast<double>(c)));
  return ad::reshape(ad::matmul(ad::softmax(scores, -1), v), Shape{b, t});
}

template <typename T>
TemporalState<T> temporal_branch(const Var<T>& x, const TemporalParams<T>& p) {
  check_video(x, "temporal_branch");
  const std::size_t b = x.shape()[0], t = x.shape()[1];
  TemporalState<T> st;
  std::tie(st.a_avg, st.a_max) = descriptors(x);
  std::tie(st.w_global, st.d_local) = deviations(st.a_avg);
  st.gate = temporal_gate(st.a_avg, st.a_max, st.w_global, st.d_local, p);
  const Var<T> tokens = ad::mean(x, Axes{3, 4}) * ad::reshape(st.gate, Shape{b, t, 1});
  st.ta = temporal_attention(tokens, p.wq, p.wk, p.wv);
  st.x_t = x * ad::sigmoid(ad::reshape(st.ta, Shape{b, t, 1, 1, 1})) + x;
  return st;
}

template <typename T>
void register_temporal_params(ParameterSet<T>& set, const std::string& prefix, const TemporalConfig& cfg,
                              std::uint64_t seed) {
  const std::size_t c = cfg.channels;
  set.add(prefix + "alpha", Tensor<T>(Shape{1}, T(1)));
  set.add(prefix + "beta", Tensor<T>(Shape{1}, T(1)));
  set.add(prefix + "gamma", Tensor<T>(Shape{1}, T(1)));
  set.add(prefix + "delta", Tensor<T>(Shape{1}, T(0.5)));
  ad::Rng rq(seed, prefix + "wq"), rk(seed, prefix + "wk"), rv(seed, prefix + "wv");
  set.add(prefix + "wq", ad::normal_tensor<T>(Shape{c, c}, 0.02, rq));
  set.add(prefix + "wk", ad::normal_tensor<T>(Shape{c, c}, 0.02, rk));
  set.add(prefix + "wv", ad::normal_tensor<T>(Shape{c, 1}, 0.02, rv));
}

template <typename T>
TemporalParams<T> bind_temporal_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix) {
  TemporalParams<T> p;
  p.alpha = g.parameter(set.get(prefix + "alpha"));
  p.beta = g.parameter(set.get(prefix + "beta"));
  p.gamma = g.parameter(set.get(prefix + "gamma"));
  p.delta = g.parameter(set.get(prefix + "delta"));
  p.wq = g.parameter(set.get(prefix + "wq"));
  p.wk = g.parameter(set.get(prefix + "wk"));
  p.wv = g.parameter(set.get(prefix + "wv"));
  return p;
}

#define HDF_INSTANTIATE_TEMPORAL(T)                                                                          \
  template std::pair<Var<T>, Var<T>> descriptors(const Var<T>&);                                            \
  template std::pair<Var<T>, Var<T>> deviations(const Var<T>&);                                             \
  template Var<T> zscore(const Var<T>&);                                                                     \
  template Var<T> temporal_gate(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&,                  \
                                const TemporalParams<T>&);                                                   \
  template Var<T> temporal_attention(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&);            \
  template TemporalState<T> temporal_branch(const Var<T>&, const TemporalParams<T>&);                        \
  template void register_temporal_params(ParameterSet<T>&, const std::string&, const TemporalConfig&,        \
                                         std::uint64_t);                                                     \
  template TemporalParams<T> bind_temporal_params(Graph<T>&, ParameterSet<T>&, const std::string&);

HDF_INSTANTIATE_TEMPORAL(float)
HDF_INSTANTIATE_TEMPORAL(double)

}  // namespace hdf::dam
