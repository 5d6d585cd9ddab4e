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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hdf/dam/fusion.hpp"
#include "oracles.hpp"

using namespace hdf;
using ad::Graph;
using ad::Rng;
using ad::Shape;
using ad::Tensor;

namespace {

struct Inputs {
  std::size_t b, t, c, h, w;
  oracle::Vec xt, xs, wt, ws;
  double bt, bs;
};

Inputs random_inputs(Rng& rng) {
  Inputs in{1 + rng.below(4), 1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(3), 1 + rng.below(3), {}, {}, {}, {}, 0, 0};
  const std::size_t n = in.b * in.t * in.c * in.h * in.w;
  in.xt = oracle::random_vec(n, rng);
  in.xs = oracle::random_vec(n, rng);
  in.wt = oracle::random_vec(in.c, rng);
  in.ws = oracle::random_vec(in.c, rng);
  in.bt = rng.uniform(-1, 1);
  in.bs = rng.uniform(-1, 1);
  return in;
}

dam::FusionState<double> run(Graph<double>& g, const Inputs& in, bool swap, dam::FusionNorm norm) {
  const Shape s{in.b, in.t, in.c, in.h, in.w};
  dam::FusionParams<double> p;
  p.w_t = g.constant(Tensor<double>({in.c, 1}, swap ? in.ws : in.wt));
  p.w_s = g.constant(Tensor<double>({in.c, 1}, swap ? in.wt : in.ws));
  p.b_t = g.constant(Tensor<double>({1}, swap ? in.bs : in.bt));
  p.b_s = g.constant(Tensor<double>({1}, swap ? in.bt : in.bs));
  return dam::fuse(g.constant(Tensor<double>(s, swap ? in.xs : in.xt)), g.constant(Tensor<double>(s, swap ? in.xt : in.xs)),
                   p, norm);
}

}  // namespace

TEST_CASE("fusion matches the oracle under both normalizations") {
  Rng rng(51, "fuse");
  for (int rep = 0; rep < 12; ++rep) {
    const auto in = random_inputs(rng);
    for (bool soft : {false, true}) {
      Graph<double> g(false);
      const auto st = run(g, in, false, soft ? dam::FusionNorm::kSoftmax : dam::FusionNorm::kRenormalize);
      const auto want = oracle::fuse(in.xt, in.xs, in.b, in.t, in.c, in.h * in.w, in.wt, in.bt, in.ws, in.bs, soft);
      CHECK(oracle::rel_error(st.lambda_t.value().vec(), want.lambda_t) < 1e-12);
      CHECK(oracle::rel_error(st.lambda_s.value().vec(), want.lambda_s) < 1e-12);
      CHECK(oracle::rel_error(st.x_fused.value().vec(), want.x) < 1e-12);
    }
  }
}

TEST_CASE("weights are a convex pair and the output lies between the branches") {
  Rng rng(52, "convex");
  for (int rep = 0; rep < 12; ++rep) {
    const auto in = random_inputs(rng);
    Graph<double> g(false);
    const auto st = run(g, in, false, dam::FusionNorm::kRenormalize);
    for (std::size_t i = 0; i < in.b; ++i) {
      CHECK(st.lambda_t.value()[i] + st.lambda_s.value()[i] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(st.lambda_t.value()[i] > 0);
      CHECK(st.lambda_s.value()[i] > 0);
    }
    for (std::size_t j = 0; j < in.xt.size(); ++j) {
      CHECK(st.x_fused.value()[j] >= std::min(in.xt[j], in.xs[j]) - 1e-12);
      CHECK(st.x_fused.value()[j] <= std::max(in.xt[j], in.xs[j]) + 1e-12);
    }
  }
}

TEST_CASE("swapping branches and their parameters swaps the weights") {
  Rng rng(53, "swap");
  for (int rep = 0; rep < 8; ++rep) {
    const auto in = random_inputs(rng);
    Graph<double> g(false);
    const auto a = run(g, in, false, dam::FusionNorm::kRenormalize);
    const auto b = run(g, in, true, dam::FusionNorm::kRenormalize);
    for (std::size_t i = 0; i < in.b; ++i) CHECK(a.lambda_t.value()[i] == doctest::Approx(b.lambda_s.value()[i]).epsilon(1e-14));
    CHECK(oracle::rel_error(a.x_fused.value().vec(), b.x_fused.value().vec()) < 1e-14);
  }
}

TEST_CASE("zero parameters average the branches and identical inputs pass through") {
  Rng rng(54, "zero");
  auto in = random_inputs(rng);
  std::fill(in.wt.begin(), in.wt.end(), 0.0);
  std::fill(in.ws.begin(), in.ws.end(), 0.0);
  in.bt = in.bs = 0;
  Graph<double> g(false);
  const auto st = run(g, in, false, dam::FusionNorm::kRenormalize);
  for (std::size_t j = 0; j < in.xt.size(); ++j)
    CHECK(st.x_fused.value()[j] == doctest::Approx(0.5 * (in.xt[j] + in.xs[j])).epsilon(1e-14));

  auto same = random_inputs(rng);
  same.xs = same.xt;
  const auto st2 = run(g, same, false, dam::FusionNorm::kSoftmax);
  CHECK(oracle::rel_error(st2.x_fused.value().vec(), same.xt) < 1e-14);

  ad::ParameterSet<double> ps;
  dam::register_fusion_params(ps, "u.", dam::FusionConfig{3});
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (double v : ps[i].value.vec()) CHECK(v == 0.0);
  CHECK(ps.get("u.w_t").value.shape() == Shape{3, 1});
}

TEST_CASE("mismatched branch shapes are rejected") {
  Graph<double> g(false);
  dam::FusionParams<double> p{g.constant(Tensor<double>({2, 1})), g.constant(Tensor<double>({2, 1})),
                              g.constant(Tensor<double>({1})), g.constant(Tensor<double>({1}))};
  CHECK_THROWS_AS(dam::fuse(g.constant(Tensor<double>({1, 1, 2, 2, 2})), g.constant(Tensor<double>({1, 2, 2, 2, 2})), p),
                  ad::ShapeError);
}
