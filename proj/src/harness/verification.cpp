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

#include "hdf/harness/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "hdf/dct.hpp"
#include "hdf/diffcore/init.hpp"
#include "hdf/dsm.hpp"
#include "hdf/model.hpp"

namespace hdf::harness {

using ad::Graph;
using ad::ParameterSet;
using ad::Shape;
using ad::Tensor;
using ad::Var;

namespace {

using Case = std::function<ad::GradCheckReport(std::uint64_t seed, std::size_t instance, double tol)>;

Tensor<double> randn(Shape s, ad::Rng& rng, double std = 1.0) { return ad::normal_tensor<double>(std::move(s), std, rng); }

Var<double> unit_rows(const Var<double>& z) {
  return z / ad::sqrt(ad::sum(ad::square(z), ad::Axes{1}, true) + 1e-24);
}

// Floor of the relative error: FD round-off on O(10) losses is ~1e-10, so
// gradients below 1e-4 are compared in absolute terms.
ad::GradCheckOptions options() {
  ad::GradCheckOptions o;
  o.floor = 1e-4;
  return o;
}

ad::GradCheckReport ops_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "ops");
  ParameterSet<double> ps;
  ps.add("a", randn({3, 4}, rng));
  ps.add("b", randn({4, 5}, rng));
  ps.add("c", randn({3, 1}, rng));
  auto f = [&](Graph<double>& g) {
    auto a = g.parameter(ps.get("a"));
    auto b = g.parameter(ps.get("b"));
    auto c = g.parameter(ps.get("c"));
    auto m = ad::matmul(a, b);                                   // [3,5]
    auto t = ad::tanh(m) * ad::sigmoid(m + c) - ad::exp(m * 0.1) / (ad::square(c) + 1.0);
    auto v = ad::variance(t, {1}, true) + ad::l2_norm(t, {0}, true) * 0.5;
    auto s = ad::softmax(t, 1) * ad::log_softmax(t, 0);
    auto mx = ad::max(ad::concat(std::vector<Var<double>>{t, s}, 1), {1});
    return ad::sum_all(v) + ad::mean_all(s) + ad::sum_all(mx) + ad::sum_all(ad::silu(ad::permute(t, {1, 0})));
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport conv_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "conv");
  ParameterSet<double> ps;
  ps.add("x", randn({2, 4, 2, 5, 5}, rng));
  ps.add("w", randn({3, 2, 3, 3, 3}, rng, 0.3));
  const Tensor<double> probe = randn({2, 2, 3, 3, 3}, rng);
  auto f = [&](Graph<double>& g) {
    ad::Conv3dOptions opt;
    opt.stride = {2, 2, 2};
    opt.padding = {1, 1, 1};
    auto y = ad::conv3d(g.parameter(ps.get("x")), g.parameter(ps.get("w")), opt);
    return ad::sum_all(y * g.constant(probe));
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport dct_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "dct");
  ParameterSet<double> ps;
  ps.add("x", randn({2, 3, 5, 4}, rng));
  const Tensor<double> probe = randn({2, 3, 5, 4}, rng);
  const dct::DctPlan<double> plan(5, 4);
  auto f = [&](Graph<double>& g) {
    return ad::sum_all(ad::square(dct::dct_frames(g.parameter(ps.get("x")), plan) - g.constant(probe)));
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport freq_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "freq");
  ParameterSet<double> ps;
  ps.add("x", randn({2, 3, 2, 4, 4}, rng));
  dam::FreqConfig fc{2, 4, 4, 0.03, dam::VarianceAxes::kPerFrame};
  dam::register_freq_params(ps, "f.", fc, seed);
  // Larger projections than the init so the attention path carries signal.
  for (const char* n : {"f.wq", "f.wk", "f.wv"}) ps.get(std::string(n)).value = randn({2, 2}, rng, 0.5);
  ps.get("f.mix").value = randn({2, 2}, rng, 0.7);
  const Tensor<double> probe = randn({2, 3, 2, 4, 4}, rng);
  const dct::DctPlan<double> plan(4, 4);
  auto f = [&](Graph<double>& g) {
    auto st = dam::freq_branch(g.parameter(ps.get("x")), dam::bind_freq_params(g, ps, "f.", fc), plan);
    return ad::sum_all(st.x_s * g.constant(probe));
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport temporal_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "temporal");
  ParameterSet<double> ps;
  ps.add("x", randn({2, 5, 3, 3, 3}, rng));
  dam::register_temporal_params(ps, "t.", dam::TemporalConfig{3}, seed);
  ps.get("t.wq").value = randn({3, 3}, rng, 0.5);
  ps.get("t.wk").value = randn({3, 3}, rng, 0.5);
  ps.get("t.wv").value = randn({3, 1}, rng, 0.5);
  const Tensor<double> probe = randn({2, 5, 3, 3, 3}, rng);
  auto f = [&](Graph<double>& g) {
    auto st = dam::temporal_branch(g.parameter(ps.get("x")), dam::bind_temporal_params(g, ps, "t."));
    return ad::sum_all(st.x_t * g.constant(probe));
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport fusion_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "fusion");
  ParameterSet<double> ps;
  ps.add("xt", randn({3, 2, 4, 2, 2}, rng));
  ps.add("xs", randn({3, 2, 4, 2, 2}, rng));
  dam::register_fusion_params(ps, "u.", dam::FusionConfig{4});
  ps.get("u.w_t").value = randn({4, 1}, rng);
  ps.get("u.w_s").value = randn({4, 1}, rng);
  ps.get("u.b_t").value = randn({1}, rng);
  const Tensor<double> probe = randn({3, 2, 4, 2, 2}, rng);
  auto f = [&](Graph<double>& g) {
    auto st = dam::fuse(g.parameter(ps.get("xt")), g.parameter(ps.get("xs")), dam::bind_fusion_params(g, ps, "u."),
                        seed % 2 ? dam::FusionNorm::kSoftmax : dam::FusionNorm::kRenormalize);
    return ad::sum_all(st.x_fused * g.constant(probe));
  };
  return ad::grad_check(ps, f, tol, options());
}

// Training treats the Gaussian weights as constants, so the analytic
// gradient is that of the loss with the weights frozen at the current
// point. Even instances check that surrogate; odd ones check the fully
// differentiable variant against the true derivative.
// Rows are shifted to a zero off-diagonal maximum: near-parallel embeddings
// put every log-weight near -(1/tau - eta)^2 / 2eta^2, and a loss of that
// size would drown the FD quotient in round-off. A constant per-anchor shift
// changes the loss by a constant and leaves the gradient untouched.
Tensor<double> frozen_log_weights(const Tensor<double>& z_unit, const dsm::DsmConfig& cfg) {
  Graph<double> g(false);
  Tensor<double> lw = dsm::gaussian_log_weights(dsm::similarity(g.constant(z_unit), cfg.tau), cfg.eta).value();
  const std::size_t n = lw.shape()[0];
  for (std::size_t i = 0; i < n; ++i) {
    double m = -1e300;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) m = std::max(m, lw[i * n + j]);
    for (std::size_t j = 0; j < n; ++j) lw[i * n + j] -= m;
  }
  return lw;
}

Tensor<double> unit_rows_value(const Tensor<double>& z) {
  Graph<double> g(false);
  return unit_rows(g.constant(z)).value();
}

struct DscPath {
  dsm::DsmConfig cfg;
  std::optional<Tensor<double>> logw;  // set for the frozen surrogate

  Var<double> dsc(const Var<double>& z, const std::vector<int>& y) const {
    return logw ? dsm::dsc_loss_fixed(z, y, cfg.tau, *logw).loss : dsm::dsc_loss(z, y, cfg).loss;
  }
  Var<double> ib_dsc(const Var<double>& z, const std::vector<int>& y) const {
    return dsc(z, y) + dsm::ib_penalty(z) * cfg.beta_ib;
  }
};

DscPath dsc_path(dsm::DsmConfig cfg, std::size_t instance, const Tensor<double>& z_unit) {
  DscPath p{cfg, std::nullopt};
  if (instance % 2 == 0) p.logw = frozen_log_weights(z_unit, cfg);
  else p.cfg.differentiable_weights = true;
  return p;
}

double min_abs(const Tensor<double>& t) {
  double m = 1e300;
  for (double v : t.vec()) m = std::min(m, std::abs(v));
  return m;
}

double kink_margin(const dam::FreqState<double>& f, const dam::TemporalState<double>& t) {
  double m = min_abs(f.f_dct.value());
  m = std::min(m, min_abs(t.w_global.value()));
  // d_local[:, 0] is identically zero and never moves.
  const auto& d = t.d_local.value();
  const std::size_t frames = d.shape()[1];
  for (std::size_t i = 0; i < d.size(); ++i)
    if (i % frames != 0) m = std::min(m, std::abs(d[i]));
  return m;
}

std::vector<int> labels_for(std::size_t n, std::size_t k) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % k);
  return y;
}

ad::GradCheckReport dsc_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "dsc");
  ParameterSet<double> ps;
  ps.add("z", randn({6, 4}, rng));
  const auto path = dsc_path(dsm::DsmConfig{}, instance, unit_rows_value(ps.get("z").value));
  const auto y = labels_for(6, 2);
  auto f = [&](Graph<double>& g) { return path.dsc(unit_rows(g.parameter(ps.get("z"))), y); };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport ib_dsc_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "ib_dsc");
  ParameterSet<double> ps;
  ps.add("z", randn({6, 4}, rng));
  dsm::DsmConfig cfg;
  cfg.beta_ib = 0.5;
  const auto path = dsc_path(cfg, instance, unit_rows_value(ps.get("z").value));
  const auto y = labels_for(6, 3);
  auto f = [&](Graph<double>& g) { return path.ib_dsc(unit_rows(g.parameter(ps.get("z"))), y); };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport total_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  ad::Rng rng(seed, "total");
  ParameterSet<double> ps;
  ps.add("logits", randn({6, 3}, rng));
  ps.add("z", randn({6, 4}, rng));
  dsm::DsmConfig cfg;
  const auto state = dsm::update_scaling(dsm::ScalingState{}, rng.uniform(0.0, 5.0), cfg);
  const auto path = dsc_path(cfg, instance, unit_rows_value(ps.get("z").value));
  const auto y = labels_for(6, 3);
  auto f = [&](Graph<double>& g) {
    auto ce = dsm::cross_entropy(g.parameter(ps.get("logits")), y);
    auto sc = path.ib_dsc(unit_rows(g.parameter(ps.get("z"))), y);
    return dsm::total_loss(ce, sc, state);
  };
  return ad::grad_check(ps, f, tol, options());
}

ad::GradCheckReport model_case(std::uint64_t seed, [[maybe_unused]] std::size_t instance, double tol) {
  model::ModelConfig mc;
  mc.frames = 4;
  mc.height = mc.width = 8;
  mc.channels = 2;
  mc.stages = 1;
  mc.num_classes = 2;
  mc.embed_dim = 3;
  model::Model<double> m(mc, seed);
  ad::Rng rng(seed, "model");
  // Lift the attention projections off their tiny init so every path matters.
  for (const char* n : {"dam.freq.wq", "dam.freq.wk", "dam.freq.wv", "dam.temporal.wq", "dam.temporal.wk",
                        "dam.temporal.wv", "dam.fusion.w_t", "dam.fusion.w_s"}) {
    auto& p = m.params().get(n);
    p.value = randn(p.value.shape(), rng, 0.5);
  }
  // sign() and |.| jump or kink at zero; central differences straddling one
  // measure the jump, not the gradient. Redraw until every such argument
  // clears the step by a wide margin.
  Tensor<double> x;
  for (int attempt = 0;; ++attempt) {
    x = randn({4, 4, 1, 8, 8}, rng);
    Graph<double> g(false);
    const auto out = m.forward(g, x);
    if (attempt >= 50 || kink_margin(*out.freq, *out.temporal) > 1e-3) break;
  }
  const std::vector<int> y{0, 0, 1, 1};
  dsm::DsmConfig cfg;
  // The differentiable variant has no constant to shift out; a warmer
  // temperature keeps its loss O(10) on near-parallel initial embeddings.
  if (instance % 2 == 1) cfg.tau = 0.5;
  const auto state = dsm::initial_scaling(cfg);
  Tensor<double> z0;
  {
    Graph<double> g(false);
    z0 = m.forward(g, x).embeddings.value();
  }
  const auto path = dsc_path(cfg, instance, z0);
  auto f = [&](Graph<double>& g) {
    auto out = m.forward(g, x);
    auto ce = dsm::cross_entropy(out.logits, y);
    auto sc = path.ib_dsc(out.embeddings, y);
    return dsm::total_loss(ce, sc, state);
  };
  return ad::grad_check(m.params(), f, tol, options());
}

const std::vector<std::pair<std::string, Case>>& cases() {
  static const std::vector<std::pair<std::string, Case>> table{
      {"ops", ops_case},           {"conv3d", conv_case},     {"dct", dct_case},       {"freq_branch", freq_case},
      {"temporal_branch", temporal_case}, {"fusion", fusion_case}, {"dsc", dsc_case}, {"ib_dsc", ib_dsc_case},
      {"total", total_case},       {"model", model_case},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& gradient_case_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [n, _] : cases()) out.push_back(n);
    return out;
  }();
  return names;
}

std::vector<SuiteCase> run_gradient_suite(const SuiteOptions& opt) {
  for (const auto& n : opt.only) {
    const auto& names = gradient_case_names();
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      throw std::invalid_argument("unknown gradient case '" + n + "'");
    }
  }
  std::vector<SuiteCase> out;
  for (const auto& [name, fn] : cases()) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), name) == opt.only.end()) continue;
    SuiteCase sc;
    sc.name = name;
    for (std::size_t i = 0; i < opt.instances; ++i) {
      const auto report = fn(ad::splitmix64(opt.seed + i), i, opt.tolerance);
      for (const auto& e : report.entries) sc.checked += e.checked;
      sc.max_rel_error = std::max(sc.max_rel_error, report.max_rel_error());
      sc.passed = sc.passed && report.passed();
      ++sc.instances;
    }
    out.push_back(sc);
  }
  return out;
}

}  // namespace hdf::harness
