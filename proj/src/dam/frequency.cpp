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

#include "hdf/dam/frequency.hpp"

#include <cmath>

namespace hdf::dam {

using ad::Axes;
using ad::Shape;

template <typename T>
Var<T> extract_freq(const Var<T>& x, const Var<T>& mix, const dct::DctPlan<T>& plan) {
  if (x.shape().size() != 5) throw ad::ShapeError("extract_freq", "expected [B,T,C,H,W], got " + ad::to_string(x.shape()));
  return ad::channel_mix(dct::dct_frames(x, plan), mix, 2);
}

template <typename T>
Var<T> batch_mean(const Var<T>& f_dct) {
  return ad::mean(f_dct, Axes{0}, true);
}

template <typename T>
Var<T> sample_deviation(const Var<T>& f_dct, const Var<T>& mean) {
  return ad::l2_norm(f_dct - mean, Axes{1, 2, 3, 4}, true);
}

template <typename T>
Var<T> perturb(const Var<T>& f_dct, const Var<T>& alpha, const Var<T>& beta, T epsilon, const Var<T>& mean) {
  const Var<T> s = ad::sign(f_dct);
  const Var<T> dev = sample_deviation(f_dct, mean);
  return f_dct + s * (alpha * epsilon) + beta * s * dev;
}

template <typename T>
Var<T> dyn_fit(const Var<T>& f_adv, const Var<T>& alpha, const Var<T>& gamma, const Var<T>& beta, VarianceAxes axes) {
  const Axes red = axes == VarianceAxes::kPerFrame ? Axes{2, 3, 4} : Axes{1, 2, 3, 4};
  const Var<T> var = ad::variance(f_adv, red, true);
  const Var<T> gain = alpha / ad::sqrt(var + static_cast<T>(kDynFitEpsilon));
  return ad::tanh(gain * f_adv) * gamma + beta;
}

template <typename T>
Var<T> spatial_attention(const Var<T>& f, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv) {
  const Shape& s = f.shape();
  if (s.size() != 5) throw ad::ShapeError("spatial_attention", "expected [B,T,C,H,W], got " + ad::to_string(s));
  const std::size_t b = s[0], t = s[1], c = s[2], h = s[3], w = s[4];
  const Var<T> tokens = ad::reshape(ad::permute(f, {0, 1, 3, 4, 2}), Shape{b * t, h * w, c});
  const Var<T> q = ad::matmul(tokens, wq);
  const Var<T> k = ad::matmul(tokens, wk);
  const Var<T> v = ad::matmul(tokens, wv);
  const Var<T> scores = ad::matmul(q, k, false, true) * static_cast<T>(1.0 / std::sqrt(static_cast<double>(c)));
  const Var<T> out = ad::matmul(ad::softmax(scores, -1), v);
  return ad::permute(ad::reshape(out, Shape{b, t, h, w, c}), {0, 1, 4, 2, 3});
}

template <typename T>
Var<T> residual_gate(const Var<T>& x, const Var<T>& att) {
  return x * ad::sigmoid(att) + x;
}

template <typename T>
FreqState<T> freq_branch(const Var<T>& x, const FreqParams<T>& p, const dct::DctPlan<T>& plan, VarianceAxes axes) {
  FreqState<T> st;
  st.f_dct = extract_freq(x, p.mix, plan);
  st.f_adv = perturb(st.f_dct, p.alpha_adv, p.beta_adv, p.epsilon_adv, batch_mean(st.f_dct));
  st.f_dyn = dyn_fit(st.f_adv, p.alpha_dyn, p.gamma_dyn, p.beta_dyn, axes);
  st.f_att = spatial_attention(st.f_dyn, p.wq, p.wk, p.wv);
  st.x_s = residual_gate(x, st.f_att);
  return st;
}

template <typename T>
void register_freq_params(ParameterSet<T>& set, const std::string& prefix, const FreqConfig& cfg, std::uint64_t seed) {
  const std::size_t c = cfg.channels;
  auto scalar = [](double v) { return Tensor<T>(Shape{1}, static_cast<T>(v)); };
  set.add(prefix + "alpha_adv", scalar(0.1));
  set.add(prefix + "beta_adv", scalar(0.01));
  set.add(prefix + "alpha_dyn", scalar(1.0));
  set.add(prefix + "gamma_dyn", scalar(1.0));
  set.add(prefix + "beta_dyn", scalar(0.0));
  Tensor<T> eye(Shape{c, c});
  for (std::size_t i = 0; i < c; ++i) eye[i * c + i] = T(1);
  set.add(prefix + "mix", std::move(eye));
  for (const char* name : {"wq", "wk", "wv"}) {
    ad::Rng rng(seed, prefix + name);
    set.add(prefix + name, ad::normal_tensor<T>(Shape{c, c}, 0.02, rng));
  }
}

template <typename T>
FreqParams<T> bind_freq_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix, const FreqConfig& cfg) {
  FreqParams<T> p;
  p.alpha_adv = g.parameter(set.get(prefix + "alpha_adv"));
  p.beta_adv = g.parameter(set.get(prefix + "beta_adv"));
  p.alpha_dyn = g.parameter(set.get(prefix + "alpha_dyn"));
  p.gamma_dyn = g.parameter(set.get(prefix + "gamma_dyn"));
  p.beta_dyn = g.parameter(set.get(prefix + "beta_dyn"));
  p.mix = g.parameter(set.get(prefix + "mix"));
  p.wq = g.parameter(set.get(prefix + "wq"));
  p.wk = g.parameter(set.get(prefix + "wk"));
  p.wv = g.parameter(set.get(prefix + "wv"));
  p.epsilon_adv = static_cast<T>(cfg.epsilon_adv);
  return p;
}

#define HDF_INSTANTIATE_FREQ(T)                                                                              \
  template Var<T> extract_freq(const Var<T>&, const Var<T>&, const dct::DctPlan<T>&);                        \
  template Var<T> batch_mean(const Var<T>&);                                                                 \
  template Var<T> sample_deviation(const Var<T>&, const Var<T>&);                                           \
  template Var<T> perturb(const Var<T>&, const Var<T>&, const Var<T>&, T, const Var<T>&);                    \
  template Var<T> dyn_fit(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&, VarianceAxes);         \
  template Var<T> spatial_attention(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&);             \
  template Var<T> residual_gate(const Var<T>&, const Var<T>&);                                               \
  template FreqState<T> freq_branch(const Var<T>&, const FreqParams<T>&, const dct::DctPlan<T>&, VarianceAxes); \
  template void register_freq_params(ParameterSet<T>&, const std::string&, const FreqConfig&, std::uint64_t); \
  template FreqParams<T> bind_freq_params(Graph<T>&, ParameterSet<T>&, const std::string&, const FreqConfig&);

HDF_INSTANTIATE_FREQ(float)
HDF_INSTANTIATE_FREQ(double)

}  // namespace hdf::dam
