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

#include <cmath>

#include "hdf/diffcore/grad_check.hpp"
#include "hdf/diffcore/init.hpp"
#include "hdf/diffcore/ops.hpp"
#include "oracles.hpp"

using namespace hdf::ad;

namespace {

Tensor<double> rand_t(const Shape& s, Rng& rng, double lo = -2, double hi = 2) {
  return uniform_tensor<double>(s, lo, hi, rng);
}

// Inputs bounded away from zero so abs/sign kinks stay out of FD stencils.
Tensor<double> away_from_zero(const Shape& s, Rng& rng) {
  Tensor<double> t = rand_t(s, rng);
  for (auto& v : t.vec()) v = (v < 0 ? -1 : 1) * (0.1 + std::abs(v));
  return t;
}

}  // namespace

TEST_CASE("scalar forward and backward basics") {
  Graph<double> g;
  auto x = g.input(Tensor<double>::scalar(3.0));
  auto y = square(x);
  CHECK(y.item() == 9.0);
  g.backward(y);
  CHECK(g.grad(x).item() == doctest::Approx(6.0).epsilon(1e-15));

  Graph<double> h;
  CHECK(sigmoid(h.constant(Tensor<double>::scalar(0.0))).item() == 0.5);
}

TEST_CASE("gradient of a function that ignores the input is zero") {
  Graph<double> g;
  auto x = g.input(Tensor<double>(Shape{3}, 1.5));
  auto c = g.input(Tensor<double>(Shape{3}, 2.0));
  g.backward(sum_all(square(c)));
  const auto gx = g.grad(x);
  for (double v : gx.vec()) CHECK(v == 0.0);
}

TEST_CASE("backward contract errors") {
  Graph<double> g;
  auto x = g.input(Tensor<double>(Shape{2}, 1.0));
  CHECK_THROWS_AS(g.backward(x * x), GraphError);
  auto s = sum_all(x * x);
  g.backward(s);
  CHECK_THROWS_AS(g.backward(s), GraphError);
  g.reset();
  CHECK(g.node_count() == 0);
}

TEST_CASE("shape errors name the operator") {
  Graph<double> g;
  auto a = g.input(Tensor<double>(Shape{2, 3}));
  auto b = g.input(Tensor<double>(Shape{4}));
  try {
    (void)add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(e.op() == "add");
    CHECK(std::string(e.what()).find("[2,3]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("matmul matches the triple loop in every transpose mode") {
  Rng rng(11, "matmul");
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t m = 1 + rng.below(6), k = 1 + rng.below(7), n = 1 + rng.below(5);
    const auto a = oracle::random_vec(m * k, rng), b = oracle::random_vec(k * n, rng);
    const oracle::Vec want = oracle::matmul(a, b, m, k, n);
    // transposed copies
    oracle::Vec at(k * m), bt(n * k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
    Graph<double> g(false);
    for (int mode = 0; mode < 4; ++mode) {
      const bool ta = mode & 1, tb = mode & 2;
      auto va = g.constant(ta ? Tensor<double>({k, m}, at) : Tensor<double>({m, k}, a));
      auto vb = g.constant(tb ? Tensor<double>({n, k}, bt) : Tensor<double>({k, n}, b));
      CHECK(oracle::rel_error(matmul(va, vb, ta, tb).value().vec(), want) < 1e-14);
    }
  }
}

TEST_CASE("batched matmul shares a rank-2 operand") {
  Rng rng(12, "bmm");
  const auto a = oracle::random_vec(3 * 4 * 5, rng), b = oracle::random_vec(5 * 2, rng);
  Graph<double> g(false);
  auto y = matmul(g.constant(Tensor<double>({3, 4, 5}, a)), g.constant(Tensor<double>({5, 2}, b)));
  REQUIRE(y.shape() == Shape{3, 4, 2});
  for (std::size_t i = 0; i < 3; ++i) {
    const oracle::Vec ai(a.begin() + i * 20, a.begin() + (i + 1) * 20);
    const oracle::Vec want = oracle::matmul(ai, b, 4, 5, 2);
    const oracle::Vec got(y.value().vec().begin() + i * 8, y.value().vec().begin() + (i + 1) * 8);
    CHECK(oracle::rel_error(got, want) < 1e-14);
  }
}

TEST_CASE("broadcasting follows right-aligned extents") {
  Rng rng(13, "bcast");
  const auto a = oracle::random_vec(2 * 3 * 4, rng), b = oracle::random_vec(3 * 1, rng);
  Graph<double> g(false);
  auto y = mul(g.constant(Tensor<double>({2, 3, 4}, a)), g.constant(Tensor<double>({3, 1}, b)));
  REQUIRE(y.shape() == Shape{2, 3, 4});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) CHECK(y.value()[(i * 3 + j) * 4 + k] == a[(i * 3 + j) * 4 + k] * b[j]);
}

TEST_CASE("reductions over named axes match loops") {
  Rng rng(14, "reduce");
  const auto a = oracle::random_vec(2 * 3 * 4, rng);
  Graph<double> g(false);
  auto x = g.constant(Tensor<double>({2, 3, 4}, a));
  auto mn = mean(x, Axes{0, 2});
  auto mx = max(x, Axes{1}, true);
  auto vr = variance(x, Axes{-1});
  auto nr = l2_norm(x, Axes{1, 2});
  REQUIRE(mn.shape() == Shape{3});
  REQUIRE(mx.shape() == Shape{2, 1, 4});
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 4; ++k) s += a[(i * 3 + j) * 4 + k];
    CHECK(mn.value()[j] == doctest::Approx(s / 8).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      double m = -1e300;
      for (std::size_t j = 0; j < 3; ++j) m = std::max(m, a[(i * 3 + j) * 4 + k]);
      CHECK(mx.value()[i * 4 + k] == m);
    }
    double sq = 0;
    for (std::size_t j = 0; j < 12; ++j) sq += a[i * 12 + j] * a[i * 12 + j];
    CHECK(nr.value()[i] == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));
    for (std::size_t j = 0; j < 3; ++j) {
      double mu = 0, v = 0;
      for (std::size_t k = 0; k < 4; ++k) mu += a[(i * 3 + j) * 4 + k] / 4;
      for (std::size_t k = 0; k < 4; ++k) v += (a[(i * 3 + j) * 4 + k] - mu) * (a[(i * 3 + j) * 4 + k] - mu) / 4;
      CHECK(vr.value()[i * 3 + j] == doctest::Approx(v).epsilon(1e-13));
    }
  }
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  Graph<double> g(false);
  auto x = g.constant(Tensor<double>({2, 3}, {1000, 1001, 1002, -5, 0, 5}));
  auto y = softmax(x, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::isfinite(y.value()[i * 3 + j]));
      s += y.value()[i * 3 + j];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  }
  auto ls = log_softmax(x, 1);
  CHECK(ls.value()[2] == doctest::Approx(std::log(y.value()[2])).epsilon(1e-12));
}

TEST_CASE("conv3d matches the direct convolution sum") {
  Rng rng(15, "conv");
  for (int rep = 0; rep < 4; ++rep) {
    const std::size_t b = 2, t = 3 + rep % 2, ci = 1 + rep % 3, h = 5, w = 4 + rep % 2, co = 2;
    const std::size_t st = 1 + rep % 2, sh = 1 + (rep / 2) % 2, pad = rep % 2;
    const auto xv = oracle::random_vec(b * t * ci * h * w, rng), wv = oracle::random_vec(co * ci * 27, rng);
    std::size_t ot, oh, ow;
    const oracle::Vec want = oracle::conv3d(xv, wv, b, t, ci, h, w, co, 3, st, sh, pad, ot, oh, ow);
    (void)ot;
    Graph<double> g(false);
    Conv3dOptions opt;
    opt.stride = {st, sh, sh};
    opt.padding = {pad, pad, pad};
    auto y = conv3d(g.constant(Tensor<double>({b, t, ci, h, w}, xv)), g.constant(Tensor<double>({co, ci, 3, 3, 3}, wv)), opt);
    CHECK(y.shape() == Shape{b, ot, co, oh, ow});
    CHECK(oracle::rel_error(y.value().vec(), want) < 1e-13);
  }
}

TEST_CASE("sign carries no gradient and detach cuts the path") {
  Graph<double> g;
  auto x = g.input(Tensor<double>({3}, {-1.5, 0.0, 2.0}));
  auto s = sign(x);
  CHECK(s.value().vec() == std::vector<double>{-1, 0, 1});
  g.backward(sum_all(s * x + detach(x) * x));
  // d/dx [sign(x) x + x_det x] = sign(x) + x
  CHECK(g.grad(x).vec() == std::vector<double>{-2.5, 0.0, 3.0});
}

TEST_CASE("sum of sigmoid matches central differences to 1e-6") {
  Rng rng(16, "sig");
  ParameterSet<double> ps;
  ps.add("v", rand_t({5}, rng));
  const auto rep = grad_check(ps, [&](Graph<double>& g) { return sum_all(sigmoid(g.parameter(ps.get("v")))); }, 1e-6);
  CHECK(rep.passed());
  CHECK(rep.max_rel_error() < 1e-6);
}

TEST_CASE("grad_check of the identity map is exact up to rounding") {
  ParameterSet<double> ps;
  ps.add("x", Tensor<double>({4}, {0.3, -0.7, 1.1, 2.0}));
  const auto rep = grad_check(ps, [&](Graph<double>& g) { return sum_all(g.parameter(ps.get("x"))); }, 1e-9);
  CHECK(rep.passed());
}

TEST_CASE("every operator agrees with finite differences") {
  Rng rng(17, "ops");
  ParameterSet<double> ps;
  ps.add("a", away_from_zero({2, 3, 4}, rng));
  ps.add("b", away_from_zero({3, 1}, rng));
  ps.add("m", rand_t({4, 3}, rng));
  ps.add("w", rand_t({2, 1, 3, 3, 3}, rng, -0.5, 0.5));
  ps.add("v", rand_t({1, 3, 1, 4, 4}, rng));
  ps.add("mix", rand_t({3, 3}, rng));
  auto f = [&](Graph<double>& g) {
    auto a = g.parameter(ps.get("a"));
    auto b = g.parameter(ps.get("b"));
    auto m = g.parameter(ps.get("m"));
    Var<double> acc = sum_all(a * b) + sum_all(a / b) + sum_all(a - b) + sum_all(exp(a * 0.3)) +
                      sum_all(log(abs(a))) + sum_all(tanh(a)) + sum_all(sigmoid(a)) + sum_all(sqrt(abs(a))) +
                      sum_all(silu(a)) + sum_all(square(a)) * 0.1;
    acc = acc + sum_all(mean(a, Axes{0, 2}) * 2.0) + sum_all(max(a, Axes{1})) + sum_all(variance(a, Axes{2}));
    acc = acc + sum_all(l2_norm(a, Axes{1, 2})) + sum_all(softmax(a, 1) * a) + sum_all(log_softmax(a, 2) * 0.5);
    acc = acc + sum_all(matmul(a, m)) + sum_all(matmul(m, m, true, false) * 0.2);
    acc = acc + sum_all(permute(a, {2, 0, 1}) * g.constant(Tensor<double>({4, 2, 3}, 0.5)));
    acc = acc + sum_all(reshape(a, Shape{6, 4}) * reshape(a, Shape{6, 4}));
    acc = acc + sum_all(concat(std::vector<Var<double>>{slice(a, 2, 0, 2), slice(a, 2, 1, 3)}, 2) * 0.3);
    acc = acc + sum_all(broadcast_to(b, Shape{2, 3, 4}) * a);
    auto v = g.parameter(ps.get("v"));
    Conv3dOptions opt;
    opt.padding = {1, 1, 1};
    acc = acc + sum_all(square(conv3d(v, g.parameter(ps.get("w")), opt)));
    acc = acc + sum_all(square(channel_mix(v, g.parameter(ps.get("mix")), 1)));
    return acc;
  };
  const auto rep = grad_check(ps, f, 1e-6);
  for (const auto& e : rep.entries) {
    INFO(e.name);
    CHECK(e.max_rel_error < 1e-6);
  }
}

TEST_CASE("forward evaluation is bitwise repeatable") {
  Rng rng(18, "det");
  const auto x = rand_t({4, 6}, rng);
  const auto w = rand_t({6, 3}, rng);
  auto run = [&] {
    Graph<float> g(false);
    auto y = softmax(matmul(g.constant(x.cast<float>()), g.constant(w.cast<float>())), 1);
    return y.value().vec();
  };
  CHECK(run() == run());
}

TEST_CASE("parameter gradients accumulate and clear") {
  ParameterSet<double> ps;
  ps.add("p", Tensor<double>({2}, {1.0, -2.0}));
  for (int k = 0; k < 2; ++k) {
    Graph<double> g;
    auto p = g.parameter(ps.get("p"));
    CHECK(g.parameter(ps.get("p")).id() == p.id());
    g.backward(sum_all(square(p)));
  }
  CHECK(ps.get("p").grad.vec() == std::vector<double>{4.0, -8.0});
  CHECK(ps.grad_norm() == doctest::Approx(std::sqrt(80.0)));
  ps.zero_grad();
  CHECK(ps.grad_norm() == 0.0);
  CHECK_THROWS_AS(ps.add("p", Tensor<double>({1})), std::invalid_argument);
}
