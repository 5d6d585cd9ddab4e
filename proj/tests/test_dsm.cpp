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
#include <numeric>

#include "hdf/diffcore/grad_check.hpp"
#include "hdf/dsm.hpp"
#include "oracles.hpp"

using namespace hdf;
using ad::Graph;
using ad::Rng;
using ad::Shape;
using ad::Tensor;

namespace {

constexpr double kTau = 0.5;  // keeps exp() of the oracle's direct sums tame

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> l(n);
  for (auto& v : l) v = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
  return l;
}

oracle::Vec weight_matrix(const oracle::Vec& s, double eta) {
  oracle::Vec w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w[i] = oracle::gaussian_weight(s[i], eta);
  return w;
}

}  // namespace

TEST_CASE("similarity and Gaussian weight examples") {
  Graph<double> g(false);
  const auto s = dsm::similarity(g.constant(Tensor<double>({2, 2}, {1, 0, 0.6, 0.8})), 0.5);
  CHECK(s.value().vec() == oracle::Vec{2, 1.2, 1.2, 2});

  const auto w = dsm::gaussian_weights(g.constant(Tensor<double>({3}, {0.2, 0.4, 0.0})), 0.2);
  CHECK(w.value()[0] == 1.0);
  CHECK(w.value()[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(w.value()[2] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("SCL and DSC match the direct-sum oracle") {
  Rng rng(61, "contrastive");
  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t n = 2 + rng.below(9), d = 2 + rng.below(6);
    const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
    const auto labels = random_labels(n, 3, rng);
    dsm::DsmConfig cfg;
    cfg.tau = kTau;
    cfg.eta = rng.uniform(0.3, 1.5);
    Graph<double> g(false);
    const auto zv = g.constant(Tensor<double>({n, d}, z));
    const auto s = oracle::similarity(z, n, d, kTau);
    const auto w = weight_matrix(s, cfg.eta);

    bool degenerate = false;
    const double want_scl = oracle::contrastive(s, labels, nullptr, &degenerate);
    const auto scl = dsm::scl_loss(zv, labels, kTau);
    CHECK(scl.degenerate == degenerate);
    if (!degenerate) CHECK(oracle::rel_error(scl.loss.value().item(), want_scl) < 1e-12);

    const auto dsc = dsm::dsc_loss(zv, labels, cfg);
    if (!degenerate) CHECK(std::abs(dsc.loss.value().item() - oracle::contrastive(s, labels, &w)) < 1e-11);
  }
}

TEST_CASE("DSC at the default temperature stays finite") {
  // tau = 0.07 pushes exp() of raw similarities past 1e6; the log-domain path copes
  Rng rng(62, "tau007");
  const std::size_t n = 16, d = 8;
  const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 4);
  Graph<double> g(false);
  const auto r = dsm::dsc_loss(g.constant(Tensor<double>({n, d}, z)), labels, dsm::DsmConfig{});
  CHECK(std::isfinite(r.loss.value().item()));
  CHECK(r.anchors == n);

  // the shifted sums agree with a long-double oracle
  const auto s = oracle::similarity(z, n, d, 0.07);
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double denom = 0;
    for (std::size_t a = 0; a < n; ++a)
      if (a != i) denom += std::exp(static_cast<long double>(s[i * n + a]) - (s[i * n + a] - 0.2) * (s[i * n + a] - 0.2) / 0.08);
    long double term = 0;
    for (std::size_t p = 0; p < n; ++p)
      if (p != i && labels[p] == labels[i]) term += std::log(denom) - s[i * n + p];
    total += term / 3;
  }
  CHECK(std::abs(r.loss.value().item() - static_cast<double>(total / n)) < 1e-9 * std::abs(static_cast<double>(total / n)));
}

TEST_CASE("two same-class samples reduce to the log weight") {
  Rng rng(63, "n2");
  for (int rep = 0; rep < 5; ++rep) {
    const auto z = oracle::normalize_rows(oracle::random_vec(6, rng), 2, 3);
    dsm::DsmConfig cfg;
    cfg.tau = kTau;
    cfg.eta = 0.7;
    const double s12 = (z[0] * z[3] + z[1] * z[4] + z[2] * z[5]) / kTau;
    Graph<double> g(false);
    const auto r = dsm::dsc_loss(g.constant(Tensor<double>({2, 3}, z)), {1, 1}, cfg);
    CHECK(r.loss.value().item() == doctest::Approx(-(s12 - 0.7) * (s12 - 0.7) / (2 * 0.49)).epsilon(1e-12));
  }
}

TEST_CASE("batches without positives are degenerate") {
  Graph<double> g(false);
  const auto z = g.constant(Tensor<double>({3, 2}, {1, 0, 0, 1, 0.6, 0.8}));
  const auto r = dsm::dsc_loss(z, {0, 1, 2}, dsm::DsmConfig{});
  CHECK(r.degenerate);
  CHECK(r.anchors == 0);
  CHECK(r.loss.value().item() == 0.0);
  CHECK(dsm::scl_loss(g.constant(Tensor<double>({1, 2}, {1, 0})), {0}, 0.1).degenerate);
}

TEST_CASE("uniform weights reduce DSC to SCL") {
  Rng rng(64, "uniform");
  const std::size_t n = 10, d = 4;
  const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
  const auto labels = random_labels(n, 2, rng);
  dsm::DsmConfig cfg;
  cfg.uniform_weights = true;
  Graph<double> g(false);
  const auto zv = g.constant(Tensor<double>({n, d}, z));
  CHECK(dsm::dsc_loss(zv, labels, cfg).loss.value().item() == dsm::scl_loss(zv, labels, cfg.tau).loss.value().item());
}

TEST_CASE("loss ignores the order of the batch") {
  Rng rng(65, "perm");
  const std::size_t n = 9, d = 5;
  const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
  const auto labels = random_labels(n, 3, rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  oracle::Vec zp(z.size());
  std::vector<int> lp(n);
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = labels[perm[i]];
    for (std::size_t p = 0; p < d; ++p) zp[i * d + p] = z[perm[i] * d + p];
  }
  Graph<double> g(false);
  const dsm::DsmConfig cfg;
  const double a = dsm::ib_dsc_loss(g.constant(Tensor<double>({n, d}, z)), labels, cfg).loss.value().item();
  const double b = dsm::ib_dsc_loss(g.constant(Tensor<double>({n, d}, zp)), lp, cfg).loss.value().item();
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("fixed log weights reproduce the detached loss and gradient") {
  Rng rng(66, "fixed");
  const std::size_t n = 8, d = 4;
  ad::ParameterSet<double> ps;
  ps.add("z", Tensor<double>({n, d}, oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d)));
  const auto labels = random_labels(n, 2, rng);
  dsm::DsmConfig cfg;
  cfg.tau = kTau;
  Graph<double> g0(false);
  const auto logw = dsm::gaussian_log_weights(dsm::similarity(g0.constant(ps.get("z").value), kTau), cfg.eta).value();

  Graph<double> ga(true), gb(true);
  const auto la = dsm::dsc_loss(ga.parameter(ps.get("z")), labels, cfg).loss;
  const auto lb = dsm::dsc_loss_fixed(gb.parameter(ps.get("z")), labels, kTau, logw).loss;
  CHECK(la.value().item() == doctest::Approx(lb.value().item()).epsilon(1e-13));
  ga.backward(la);
  const auto grad_a = ps.get("z").grad;
  ps.zero_grad();
  gb.backward(lb);
  CHECK(oracle::rel_error(ps.get("z").grad.vec(), grad_a.vec()) < 1e-12);
}

TEST_CASE("contrastive gradients agree with finite differences") {
  Rng rng(67, "dsc-grad");
  for (bool diff_w : {false, true}) {
    const std::size_t n = 6, d = 3;
    ad::ParameterSet<double> ps;
    ps.add("z", Tensor<double>({n, d}, oracle::random_vec(n * d, rng, -0.6, 0.6)));
    const std::vector<int> labels{0, 1, 0, 1, 2, 2};
    dsm::DsmConfig cfg;
    cfg.tau = kTau;
    cfg.differentiable_weights = diff_w;
    cfg.beta_ib = 0.3;
    const auto w0 = dsm::gaussian_log_weights(dsm::similarity(Graph<double>(false).constant(ps.get("z").value), kTau), cfg.eta).value();
    const auto rep = ad::grad_check(ps, [&](Graph<double>& g) {
      const auto z = g.parameter(ps.get("z"));
      // with detached weights the finite-difference reference must hold them fixed
      return diff_w ? dsm::ib_dsc_loss(z, labels, cfg).loss
                    : dsm::dsc_loss_fixed(z, labels, kTau, w0).loss + dsm::ib_penalty(z) * 0.3;
    }, 1e-6);
    CHECK(rep.passed());
  }
}

TEST_CASE("information bottleneck examples") {
  Graph<double> g(false);
  CHECK(dsm::ib_penalty(g.constant(Tensor<double>({2, 2}, {1, 0, -1, 0}))).value().item() == doctest::Approx(1.0));
  CHECK(dsm::ib_penalty(g.constant(Tensor<double>({3, 2}, {0.5, 2, 0.5, 2, 0.5, 2}))).value().item() == 0.0);
  Rng rng(68, "ib");
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 1 + rng.below(10), d = 1 + rng.below(6);
    const auto z = oracle::random_vec(n * d, rng);
    const double got = dsm::ib_penalty(g.constant(Tensor<double>({n, d}, z))).value().item();
    CHECK(std::abs(got - oracle::ib_penalty(z, n, d)) < 1e-12 * (1 + oracle::ib_penalty(z, n, d)));
  }
}

TEST_CASE("scaling weights follow the previous gradient norm") {
  dsm::DsmConfig cfg;
  cfg.alpha_base = 2;
  cfg.beta_base = 1;
  const auto s = dsm::update_scaling(dsm::ScalingState{}, 3.0, cfg);
  CHECK(s.lambda_ce == doctest::Approx(1.5));
  CHECK(s.lambda_sc == doctest::Approx(0.25));
  const auto z = dsm::update_scaling(s, 0.0, cfg);
  CHECK(z.lambda_ce == 0.0);
  CHECK(z.lambda_sc == 1.0);
  const auto init = dsm::initial_scaling(dsm::DsmConfig{});
  CHECK(init.lambda_ce == 0.5);
  CHECK(init.lambda_sc == 0.5);
  Rng rng(69, "scaling");
  for (int rep = 0; rep < 10; ++rep) {
    const double gn = rng.uniform(0, 50), a = rng.uniform(0.1, 3), b = rng.uniform(0.1, 3);
    cfg.alpha_base = a;
    cfg.beta_base = b;
    const auto got = dsm::update_scaling(s, gn, cfg);
    const auto want = oracle::scaling(gn, a, b);
    CHECK(got.lambda_ce == doctest::Approx(want.lambda_ce).epsilon(1e-14));
    CHECK(got.lambda_sc == doctest::Approx(want.lambda_sc).epsilon(1e-14));
  }
  CHECK_THROWS_AS(dsm::update_scaling(s, -1.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(dsm::update_scaling(s, NAN, cfg), std::invalid_argument);
}

TEST_CASE("total loss and cross-entropy") {
  Graph<double> g(false);
  const auto ce = g.constant(Tensor<double>::scalar(2.0)), sc = g.constant(Tensor<double>::scalar(-4.0));
  CHECK(dsm::total_loss(ce, sc, dsm::ScalingState{3.0, 1.5, 0.25}).value().item() == doctest::Approx(2.0));

  const oracle::Vec logits{1, 2, 3, -1, 0, 4};
  const auto l = dsm::cross_entropy(g.constant(Tensor<double>({2, 3}, logits)), {2, 0});
  const double l0 = std::log(std::exp(1) + std::exp(2) + std::exp(3)) - 3;
  const double l1 = std::log(std::exp(-1) + std::exp(0) + std::exp(4)) + 1;
  CHECK(l.value().item() == doctest::Approx((l0 + l1) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(dsm::cross_entropy(g.constant(Tensor<double>({2, 3}, logits)), {3, 0}), std::out_of_range);
}

TEST_CASE("invalid settings are rejected") {
  dsm::DsmConfig cfg;
  cfg.validate();
  cfg.tau = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eta = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  Graph<double> g(false);
  CHECK_THROWS_AS(dsm::dsc_loss(g.constant(Tensor<double>({3, 2})), {0, 1}, dsm::DsmConfig{}), ad::ShapeError);
}
