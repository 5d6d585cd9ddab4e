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

#include "hdf/dam/fusion.hpp"

namespace hdf::dam {

using ad::Axes;
using ad::Shape;

template <typename T>
FusionState<T> fuse(const Var<T>& x_t, const Var<T>& x_s, const FusionParams<T>& p, FusionNorm norm) {
  if (x_t.shape() != x_s.shape() || x_t.shape().size() != 5) {
    throw ad::ShapeError("fuse", "branch shapes " + ad::to_string(x_t.shape()) + " and " + ad::to_string(x_s.shape()));
  }
  const std::size_t b = x_t.shape()[0];
  const Var<T> logit_t = ad::reshape(ad::matmul(ad::mean(x_t, Axes{1, 3, 4}), p.w_t), Shape{b}) + p.b_t;
  const Var<T> logit_s = ad::reshape(ad::matmul(ad::mean(x_s, Axes{1, 3, 4}), p.w_s), Shape{b}) + p.b_s;
  FusionState<T> st;
  if (norm == FusionNorm::kRenormalize) {
    const Var<T> raw_t = ad::sigmoid(logit_t);
    const Var<T> raw_s = ad::sigmoid(logit_s);
    const Var<T> total = raw_t + raw_s;
    st.lambda_t = raw_t / total;
    st.lambda_s = raw_s / total;
  } else {
    const Var<T> w = ad::softmax(ad::concat(std::vector<Var<T>>{ad::reshape(logit_t, Shape{b, 1}),
                                                                ad::reshape(logit_s, Shape{b, 1})}, 1), 1);
    st.lambda_t = ad::reshape(ad::slice(w, 1, 0, 1), Shape{b});
    st.lambda_s = ad::reshape(ad::slice(w, 1, 1, 1), Shape{b});
  }
  const Shape bcast{b, 1, 1, 1, 1};
  st.x_fused = ad::reshape(st.lambda_t, bcast) * x_t + ad::reshape(st.lambda_s, bcast) * x_s;
  return st;
}

template <typename T>
void register_fusion_params(ParameterSet<T>& set, const std::string& prefix, const FusionConfig& cfg) {
  set.add(prefix + "w_t", Tensor<T>(Shape{cfg.channels, 1}));
  set.add(prefix + "b_t", Tensor<T>(Shape{1}));
  set.add(prefix + "w_s", Tensor<T>(Shape{cfg.channels, 1}));
  set.add(prefix + "b_s", Tensor<T>(Shape{1}));
}

template <typename T>
FusionParams<T> bind_fusion_params(Graph<T>& g, ParameterSet<T>& set, const std::string& prefix) {
  FusionParams<T> p;
  p.w_t = g.parameter(set.get(prefix + "w_t"));
  p.b_t = g.parameter(set.get(prefix + "b_t"));
  p.w_s = g.parameter(set.get(prefix + "w_s"));
  p.b_s = g.parameter(set.get(prefix + "b_s"));
  return p;
}

template FusionState<float> fuse(const Var<float>&, const Var<float>&, const FusionParams<float>&, FusionNorm);
template FusionState<double> fuse(const Var<double>&, const Var<double>&, const FusionParams<double>&, FusionNorm);
template void register_fusion_params(ParameterSet<float>&, const std::string&, const FusionConfig&);
template void register_fusion_params(ParameterSet<double>&, const std::string&, const FusionConfig&);
template FusionParams<float> bind_fusion_params(Graph<float>&, ParameterSet<float>&, const std::string&);
template FusionParams<double> bind_fusion_params(Graph<double>&, ParameterSet<double>&, const std::string&);

}  // namespace hdf::dam
