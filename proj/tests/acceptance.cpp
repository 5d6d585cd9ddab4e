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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any hard criterion fails. The desk-scale ablation is a
// soft criterion: its line is reported but does not affect the exit code.
//
//   hdf_acceptance --cli path/to/hdf --work scratch/dir [--no-ablation]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdf/dam/frequency.hpp"
#include "hdf/dam/fusion.hpp"
#include "hdf/dam/temporal.hpp"
#include "hdf/dct.hpp"
#include "hdf/dsm.hpp"
#include "hdf/harness/ablation.hpp"
#include "hdf/harness/metrics.hpp"
#include "hdf/harness/train.hpp"
#include "hdf/harness/verification.hpp"
#include "hdf/model.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hdf;
using ad::Graph;
using ad::Rng;
using ad::Shape;
using ad::Tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  std::string name;
  bool pass = false;
  bool soft = false;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(const std::string& name, bool pass, const std::string& detail, bool soft = false) {
  g_outcomes.push_back({name, pass, soft, detail});
  std::printf("%s  %-22s %s%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), soft ? "  [soft, not gating]" : "");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Running maximum of the relative error per named oracle.
struct ErrorTable {
  std::vector<std::pair<std::string, double>> rows;
  std::vector<std::size_t> counts;
  void add(const std::string& name, double err) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].first == name) {
        rows[i].second = std::max(rows[i].second, err);
        ++counts[i];
        return;
      }
    }
    rows.emplace_back(name, err);
    counts.push_back(1);
  }
};

Tensor<double> t(const Shape& s, const oracle::Vec& v) { return Tensor<double>(s, v); }

// ---------------------------------------------------------------------------

void oracle_suite() {
  const auto t0 = Clock::now();
  constexpr int kInstances = 20;
  ErrorTable tab;
  Rng rng(1001, "acceptance/oracles");
  for (int rep = 0; rep < kInstances; ++rep) {
    Graph<double> g(false);
    auto scalar = [&](double v) { return g.constant(Tensor<double>(Shape{1}, v)); };

    {  // dct2
      const std::size_t h = 1 + rng.below(10), w = 1 + rng.below(10);
      const auto x = oracle::random_vec(h * w, rng);
      tab.add("dct2", oracle::rel_error(dct::dct2(t({h, w}, x)).vec(), oracle::dct2(x, h, w)));
    }
    const std::size_t b = 1 + rng.below(4), tt = 2 + rng.below(4), c = 1 + rng.below(3), h = 2 + rng.below(3),
                      w = 2 + rng.below(3);
    const Shape s5{b, tt, c, h, w};
    const auto f = oracle::random_vec(b * tt * c * h * w, rng);
    const auto fv = g.constant(t(s5, f));
    {  // perturb
      const double a = rng.uniform(-1, 1), be = rng.uniform(-0.5, 0.5), eps = rng.uniform(0, 0.1);
      const auto y = dam::perturb(fv, scalar(a), scalar(be), eps, dam::batch_mean(fv));
      tab.add("perturb", oracle::rel_error(y.value().vec(), oracle::perturb(f, b, a, eps, be)));
    }
    {  // dyn_fit, both variance groupings
      const double a = rng.uniform(0.1, 2), ga = rng.uniform(-2, 2), be = rng.uniform(-1, 1);
      const bool per_frame = rep % 2 == 0;
      const auto y = dam::dyn_fit(fv, scalar(a), scalar(ga), scalar(be),
                                  per_frame ? dam::VarianceAxes::kPerFrame : dam::VarianceAxes::kPerSample);
      const std::size_t group = per_frame ? c * h * w : tt * c * h * w;
      tab.add("dyn_fit", oracle::rel_error(y.value().vec(), oracle::dyn_fit(f, group, a, ga, be)));
    }
    {  // temporal_gate
      const auto avg = oracle::random_vec(b * tt, rng), mx = oracle::random_vec(b * tt, rng);
      const oracle::GateParams q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      dam::TemporalParams<double> p{scalar(q.alpha), scalar(q.beta), scalar(q.gamma), scalar(q.delta), {}, {}, {}};
      const auto av = g.constant(t({b, tt}, avg));
      const auto [wg, dl] = dam::deviations(av);
      const auto y = dam::temporal_gate(av, g.constant(t({b, tt}, mx)), wg, dl, p);
      tab.add("temporal_gate", oracle::rel_error(y.value().vec(), oracle::temporal_gate(avg, mx, tt, q)));
    }
    {  // fuse
      const auto xs = oracle::random_vec(f.size(), rng), wt = oracle::random_vec(c, rng), ws = oracle::random_vec(c, rng);
      const double bt = rng.uniform(-1, 1), bs = rng.uniform(-1, 1);
      const bool soft = rep % 2 == 1;
      dam::FusionParams<double> p{g.constant(t({c, 1}, wt)), g.constant(t({c, 1}, ws)), scalar(bt), scalar(bs)};
      const auto st = dam::fuse(fv, g.constant(t(s5, xs)), p, soft ? dam::FusionNorm::kSoftmax : dam::FusionNorm::kRenormalize);
      const auto want = oracle::fuse(f, xs, b, tt, c, h * w, wt, bt, ws, bs, soft);
      tab.add("fuse", std::max(oracle::rel_error(st.x_fused.value().vec(), want.x),
                               oracle::rel_error(st.lambda_t.value().vec(), want.lambda_t)));
    }
    // contrastive family on unit rows
    const std::size_t n = 2 + rng.below(11), d = 2 + rng.below(6);
    const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    labels[1] = labels[0];  // at least one positive pair
    const double tau = rng.uniform(0.3, 1.0), eta = rng.uniform(0.3, 1.5);
    const auto zv = g.constant(t({n, d}, z));
    const auto s = oracle::similarity(z, n, d, tau);
    tab.add("similarity", oracle::rel_error(dsm::similarity(zv, tau).value().vec(), s));
    {
      oracle::Vec wgt(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) wgt[i] = oracle::gaussian_weight(s[i], eta);
      tab.add("gaussian_weights",
              oracle::rel_error(dsm::gaussian_weights(g.constant(t({n, n}, s)), eta).value().vec(), wgt));
      tab.add("scl_loss", oracle::rel_error(dsm::scl_loss(zv, labels, tau).loss.value().item(),
                                            oracle::contrastive(s, labels, nullptr)));
      dsm::DsmConfig cfg;
      cfg.tau = tau;
      cfg.eta = eta;
      tab.add("dsc_loss", oracle::rel_error(dsm::dsc_loss(zv, labels, cfg).loss.value().item(),
                                            oracle::contrastive(s, labels, &wgt)));
    }
    {
      const auto zr = oracle::random_vec(n * d, rng);
      tab.add("ib_penalty", oracle::rel_error(dsm::ib_penalty(g.constant(t({n, d}, zr))).value().item(),
                                              oracle::ib_penalty(zr, n, d)));
    }
    {
      dsm::DsmConfig cfg;
      cfg.alpha_base = rng.uniform(0.1, 3);
      cfg.beta_base = rng.uniform(0.1, 3);
      const double gn = rng.uniform(0, 20);
      const auto got = dsm::update_scaling(dsm::ScalingState{}, gn, cfg);
      const auto want = oracle::scaling(gn, cfg.alpha_base, cfg.beta_base);
      tab.add("update_scaling", std::max(oracle::rel_error(got.lambda_ce, want.lambda_ce),
                                         oracle::rel_error(got.lambda_sc, want.lambda_sc)));
    }
  }
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < 30;
  double worst = 0;
  std::size_t min_count = kInstances;
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const auto& [name, err] = tab.rows[i];
    std::printf("        %-18s instances %2zu  max rel err %.2e\n", name.c_str(), tab.counts[i], err);
    ok = ok && err < 1e-8 && tab.counts[i] >= 20;
    worst = std::max(worst, err);
    min_count = std::min(min_count, tab.counts[i]);
  }
  report("oracle-suite", ok && tab.rows.size() == 11,
         fmt("11 oracles x %zu instances, worst rel err %.2e (< 1e-8), %.2fs (< 30s)", min_count, worst, elapsed));
}

void gradient_suite() {
  const auto t0 = Clock::now();
  harness::SuiteOptions opt;
  opt.instances = 5;
  opt.tolerance = 1e-4;
  const auto cases = harness::run_gradient_suite(opt);
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < 120;
  double worst = 0;
  for (const auto& c : cases) {
    std::printf("        %-16s instances %zu  checked %6zu  max rel err %.2e  %s\n", c.name.c_str(), c.instances, c.checked,
                c.max_rel_error, c.passed ? "ok" : "FAIL");
    ok = ok && c.passed && c.instances >= 5;
    worst = std::max(worst, c.max_rel_error);
  }
  report("gradient-suite", ok, fmt("%zu cases x 5 instances, worst rel err %.2e (< 1e-4), %.1fs (< 120s)", cases.size(),
                                   worst, elapsed));
}

harness::RunConfig tiny_run() {
  harness::RunConfig c;
  c.data.num_classes = 2;
  c.data.train_per_class = 6;
  c.data.test_per_class = 3;
  c.data.frames = 4;
  c.data.height = 8;
  c.data.width = 8;
  c.model.num_classes = 2;
  c.model.channels = 2;
  c.model.stages = 1;
  c.model.embed_dim = 4;
  c.optim.epochs = 3;
  c.optim.warmup_epochs = 1;
  c.train.batch_size = 4;
  return c;
}

void reductions() {
  Rng rng(1002, "acceptance/reductions");
  bool ok = true;

  // uniform weights
  double uni = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.below(15), d = 2 + rng.below(8);
    const auto z = oracle::normalize_rows(oracle::random_vec(n * d, rng), n, d);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    labels[1] = labels[0];
    dsm::DsmConfig cfg;
    cfg.uniform_weights = true;
    Graph<double> g(false);
    const auto zv = g.constant(t({n, d}, z));
    uni = std::max(uni, oracle::rel_error(dsm::dsc_loss(zv, labels, cfg).loss.value().item(),
                                          dsm::scl_loss(zv, labels, cfg.tau).loss.value().item()));
  }
  ok = ok && uni <= 1e-15;

  // alpha_adv = beta_adv = 0
  bool identity = true;
  for (int rep = 0; rep < 20; ++rep) {
    Graph<double> g(false);
    const auto f = oracle::random_vec(2 * 3 * 2 * 4 * 4, rng);
    const auto fv = g.constant(t({2, 3, 2, 4, 4}, f));
    const auto zero = g.constant(Tensor<double>(Shape{1}, 0.0));
    identity = identity && dam::perturb(fv, zero, zero, 0.03, dam::batch_mean(fv)).value().vec() == f;
  }
  ok = ok && identity;

  // dam off equals the matching baseline, bit for bit
  bool baseline = true;
  harness::RunConfig run;
  const auto base = run.model_for_data();
  const auto data = harness::generate_bundle(run.data);
  const auto x = data.test.batch({0, 1, 2, 3, 50, 51, 100, 101});
  for (auto [with, without] : {std::pair<const char*, const char*>{"b", "a"}, {"d", "c"}}) {
    auto off = model::ablation_variant(with, base).model;
    off.dam_enabled = false;
    model::Model<float> m_off(off, 3), m_ref(model::ablation_variant(without, base).model, 3);
    Graph<float> g(false);
    const auto o1 = m_off.forward(g, x), o2 = m_ref.forward(g, x);
    baseline = baseline && o1.logits.value() == o2.logits.value() && o1.embeddings.value() == o2.embeddings.value() &&
               m_off.params().size() == m_ref.params().size();
  }
  ok = ok && baseline;

  // fusion weights and loss weights over a short training run
  auto cfg = tiny_run();
  cfg.dsm.alpha_base = 2.0;
  cfg.dsm.beta_base = 0.5;
  const auto tiny = harness::generate_bundle(cfg.data);
  const auto res = harness::train(cfg, harness::resolve_variant(cfg, "d"), 1, tiny.train, nullptr);
  double fusion = 0, scaling = 0;
  for (const auto& st : res.steps) {
    fusion = std::max(fusion, st.fusion_sum_error);
    scaling = std::max(scaling, std::abs(st.scaling.lambda_ce / 2.0 + st.scaling.lambda_sc / 0.5 - 1.0));
  }
  // the same identity at full precision on random forwards
  double fusion64 = 0;
  for (int rep = 0; rep < 10; ++rep) {
    model::Model<double> m(base, 10 + rep);
    Graph<double> g(false);
    const auto out = m.forward(g, data.train.batch({static_cast<std::size_t>(rep), static_cast<std::size_t>(rep) + 200}).cast<double>());
    for (std::size_t i = 0; i < 2; ++i) {
      fusion64 = std::max(fusion64, std::abs(out.fusion->lambda_t.value()[i] + out.fusion->lambda_s.value()[i] - 1.0));
    }
  }
  ok = ok && fusion < 1e-6 && fusion64 < 1e-15 && scaling < 1e-12 && !res.steps.empty();
  report("reductions", ok,
         fmt("uniform dsc-scl %.1e; zero perturb identity %s; dam-off == baseline %s; |lt+ls-1| %.1e (f32) %.1e (f64); "
             "|lce/a+lsc/b-1| %.1e over %zu steps",
             uni, identity ? "yes" : "NO", baseline ? "yes" : "NO", fusion, fusion64, scaling, res.steps.size()));
}

void conservation() {
  Rng rng(1003, "acceptance/conservation");
  // Parseval in float
  double parseval = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t h = 4 + rng.below(29), w = 4 + rng.below(29);
    const dct::DctPlan<float> plan(h, w);
    Tensor<float> x(Shape{3, h, w});
    for (auto& v : x.vec()) v = static_cast<float>(rng.uniform(-2, 2));
    const auto y = plan.forward(x);
    double ex = 0, ey = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ex += static_cast<double>(x[i]) * x[i];
      ey += static_cast<double>(y[i]) * y[i];
    }
    parseval = std::max(parseval, std::abs(std::sqrt(ey) - std::sqrt(ex)) / std::sqrt(ex));
  }

  // embedding norms and gate range on real activations
  harness::RunConfig run;
  const auto data = harness::generate_bundle(run.data);
  double norm_err = 0, gate_lo = 1, gate_hi = 0;
  for (const char* setting : {"a", "c", "d"}) {
    model::Model<float> m(model::ablation_variant(setting, run.model_for_data()).model, 5);
    for (std::size_t start = 0; start < data.test.size(); start += 50) {
      std::vector<std::size_t> idx;
      for (std::size_t i = start; i < std::min(data.test.size(), start + 50); ++i) idx.push_back(i);
      Graph<float> g(false);
      const auto out = m.forward(g, data.test.batch(idx));
      const auto& e = out.embeddings.value();
      const std::size_t d = e.shape()[1];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += static_cast<double>(e[i * d + k]) * e[i * d + k];
        norm_err = std::max(norm_err, std::abs(std::sqrt(s) - 1.0));
      }
      if (out.temporal) {
        for (float v : out.temporal->gate.value().vec()) {
          gate_lo = std::min(gate_lo, static_cast<double>(v));
          gate_hi = std::max(gate_hi, static_cast<double>(v));
        }
      }
    }
  }
  // and on random double inputs
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t b = 1 + rng.below(4), tt = 2 + rng.below(8);
    Graph<double> g(false);
    auto sc = [&](double v) { return g.constant(Tensor<double>(Shape{1}, v)); };
    dam::TemporalParams<double> p{sc(rng.uniform(-3, 3)), sc(rng.uniform(-3, 3)), sc(rng.uniform(-3, 3)),
                                  sc(rng.uniform(-3, 3)), {}, {}, {}};
    const auto a = g.constant(t({b, tt}, oracle::random_vec(b * tt, rng, -5, 5)));
    const auto [wg, dl] = dam::deviations(a);
    const auto gate = dam::temporal_gate(a, g.constant(t({b, tt}, oracle::random_vec(b * tt, rng, -5, 5))), wg, dl, p);
    for (double v : gate.value().vec()) {
      gate_lo = std::min(gate_lo, v);
      gate_hi = std::max(gate_hi, v);
    }
  }

  // ib_penalty: positive on distinct rows, zero on identical rows
  double ib_min_distinct = INFINITY, ib_max_identical = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.below(15), d = 1 + rng.below(8);
    Graph<double> g(false);
    ib_min_distinct = std::min(ib_min_distinct, dsm::ib_penalty(g.constant(t({n, d}, oracle::random_vec(n * d, rng)))).value().item());
    const auto row = oracle::random_vec(d, rng);
    oracle::Vec same;
    for (std::size_t i = 0; i < n; ++i) same.insert(same.end(), row.begin(), row.end());
    ib_max_identical = std::max(ib_max_identical, dsm::ib_penalty(g.constant(t({n, d}, same))).value().item());
  }
  const bool ok = parseval < 1e-6 && norm_err < 1e-5 && gate_lo > 0 && gate_hi < 1 && ib_min_distinct > 0 &&
                  ib_max_identical < 1e-28;
  report("conservation", ok,
         fmt("Parseval f32 %.1e (< 1e-6); | |e| - 1 | %.1e (< 1e-5); gate in [%.3g, %.6g]; ib distinct >= %.2e, "
             "identical <= %.1e",
             parseval, norm_err, gate_lo, gate_hi, ib_min_distinct, ib_max_identical));
}

void metrics() {
  const auto hand = harness::metrics_from_confusion({{5, 1, 0}, {2, 6, 2}, {0, 0, 4}});
  const double uar_want = 100.0 * (5.0 / 6.0 + 6.0 / 10.0 + 4.0 / 4.0) / 3.0;
  bool ok = hand.war == 75.0 && std::abs(hand.uar - uar_want) < 1e-12;
  Rng rng(1004, "acceptance/metrics");
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 2 + rng.below(8);
    std::vector<std::vector<std::int64_t>> conf(k, std::vector<std::int64_t>(k));
    std::vector<int> pred, label;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        conf[i][j] = static_cast<std::int64_t>(rng.below(i == j ? 30 : 8));
        for (std::int64_t r = 0; r < conf[i][j]; ++r) {
          label.push_back(static_cast<int>(i));
          pred.push_back(static_cast<int>(j));
        }
      }
    if (label.empty()) continue;
    const auto m = harness::metrics_from_confusion(conf);
    const auto direct = oracle::count_recalls(pred, label, k);
    double weighted = 0, mean = 0;
    std::size_t present = 0;
    for (std::size_t i = 0; i < k; ++i) {
      std::int64_t row = 0;
      for (auto v : conf[i]) row += v;
      if (row == 0) continue;
      weighted += static_cast<double>(row) / static_cast<double>(label.size()) * m.per_class_recall[i];
      mean += m.per_class_recall[i];
      ++present;
    }
    mean /= static_cast<double>(present);
    worst = std::max({worst, std::abs(m.war - direct.war), std::abs(m.uar - direct.uar), std::abs(m.war - weighted),
                      std::abs(m.uar - mean)});
  }
  ok = ok && worst < 1e-10;
  report("metrics", ok, fmt("hand example WAR %.4f UAR %.4f; 100 random confusions, worst deviation %.1e", hand.war,
                            hand.uar, worst));
}

void overfit() {
  harness::RunConfig cfg;
  const auto data = harness::generate_bundle(cfg.data);
  // two clips of each class
  const std::vector<std::size_t> batch{0, 1, 150, 151, 300, 301, 450, 451};
  const auto t0 = Clock::now();
  const auto ce_only = harness::overfit(cfg, harness::resolve_variant(cfg, "b"), 0, data.train, batch, 300, 1e-3);
  std::size_t first = 0;
  for (std::size_t s = 0; s < ce_only.size() && !first; ++s)
    if (ce_only[s].loss < 0.05) first = s + 1;
  // full model: its total loss is not bounded below by zero, so track CE
  const auto full = harness::overfit(cfg, harness::resolve_variant(cfg, "d"), 0, data.train, batch, 300, 1e-3);
  std::size_t first_d = 0;
  for (std::size_t s = 0; s < full.size() && !first_d; ++s)
    if (full[s].ce < 0.05) first_d = s + 1;
  report("overfit", first > 0,
         fmt("8-clip batch, setting b: loss < 0.05 at step %s (final %.4f); setting d: CE < 0.05 at step %s "
             "(final CE %.4f); %.0fs",
             first ? std::to_string(first).c_str() : "never", ce_only.back().loss,
             first_d ? std::to_string(first_d).c_str() : "never", full.back().ce, seconds_since(t0)));
}

void desk_ablation(const fs::path& work) {
  harness::RunConfig cfg;
  const auto data = harness::generate_bundle(cfg.data);
  fs::create_directories(work);
  std::ofstream records(work / "ablation_records.jsonl");
  const auto t0 = Clock::now();
  const auto rep = harness::run_ablation(cfg, data, &records, &std::cerr);
  const double elapsed = seconds_since(t0);
  const std::string tables = "Component ablation\n\n" + harness::format_component_table(rep) +
                             "\nBranch ablation (all rows trained with DSM)\n\n" + harness::format_branch_table(rep);
  std::ofstream(work / "ablation_tables.md") << tables;
  std::istringstream lines(tables);
  for (std::string line; std::getline(lines, line);) std::printf("        %s\n", line.c_str());
  const auto a = rep.find("a"), d = rep.find("d");
  const bool have = a && d && a->runs == 3 && d->runs == 3;
  const bool ok = have && d->uar_mean >= a->uar_mean && elapsed < 1800;
  report("desk-ablation", ok,
         have ? fmt("mean UAR over 3 seeds: d %.2f vs a %.2f (d >= a required); %.1f min (< 30)", d->uar_mean, a->uar_mean,
                    elapsed / 60)
              : std::string("settings a/d missing"),
         true);
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(const std::string& cmd, const fs::path& out) {
  const std::string full = cmd + " > \"" + out.string() + "\" 2> \"" + out.string() + ".err\"";
  return std::system(full.c_str());
}

void cli_determinism(const std::string& cli, const fs::path& work) {
  const fs::path dir = work / "cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << "data.num_classes = 2\ndata.train_per_class = 8\ndata.test_per_class = 4\ndata.frames = 4\n"
                        "data.height = 8\ndata.width = 8\nmodel.num_classes = 2\nmodel.channels = 2\nmodel.stages = 1\n"
                        "model.embed_dim = 4\noptim.epochs = 3\noptim.warmup_epochs = 1\ntrain.batch_size = 4\n"
                        "landscape.resolution = 3\nlandscape.batch = 4\n";
  const std::string base = "\"" + cli + "\" ";
  const std::string c = " -c \"" + cfg.string() + "\"";
  std::vector<std::string> failures;
  std::size_t compared = 0;
  auto same = [&](const fs::path& p1, const fs::path& p2) {
    ++compared;
    if (!fs::exists(p1) || slurp(p1) != slurp(p2) || slurp(p1).empty()) failures.push_back(p1.filename().string());
  };
  bool exit_ok = true;
  for (const char* r : {"1", "2"}) {
    const fs::path rd = dir / r;
    fs::create_directories(rd);
    exit_ok &= run(base + "gen-data" + c + " -o \"" + (rd / "data").string() + "\"", rd / "gen.out") == 0;
    exit_ok &= run(base + "train" + c + " -s train.setting=d -d \"" + (rd / "data").string() + "\" -o \"" +
                       (rd / "run").string() + "\"",
                   rd / "train.out") == 0;
    const std::string k = " -k \"" + (rd / "run" / "checkpoint.bin").string() + "\" -d \"" + (rd / "data").string() + "\"";
    exit_ok &= run(base + "eval" + k, rd / "eval.out") == 0;
    exit_ok &= run(base + "landscape" + k + " -o \"" + (rd / "landscape.tsv").string() + "\"", rd / "landscape.out") == 0;
    exit_ok &= run(base + "export-embeddings" + k + " -o \"" + (rd / "emb.tsv").string() + "\"", rd / "emb.out") == 0;
    exit_ok &= run(base + "grad-check --instances 1 --case dsc --case model", rd / "grad.out") == 0;
  }
  const fs::path r1 = dir / "1", r2 = dir / "2";
  if (fs::is_directory(r1 / "data"))
    for (const auto& e : fs::directory_iterator(r1 / "data")) same(e.path(), r2 / "data" / e.path().filename());
  else
    failures.push_back("data");
  for (const char* f : {"metrics.jsonl", "scaling.jsonl", "checkpoint.bin"}) same(r1 / "run" / f, r2 / "run" / f);
  for (const char* f : {"train.out", "eval.out", "landscape.tsv", "landscape.out", "emb.tsv", "emb.out", "grad.out"})
    same(r1 / f, r2 / f);
  std::string detail = fmt("gen-data/train/eval/landscape/export-embeddings/grad-check run twice; %zu outputs compared",
                           compared);
  if (!exit_ok) detail += "; a command exited non-zero (see " + dir.string() + ")";
  for (const auto& f : failures) detail += "; differs: " + f;
  report("cli-determinism", exit_ok && failures.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, work = "acceptance";
  bool no_ablation = false;
  app.add_option("--cli", cli, "path to the hdf executable")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_flag("--no-ablation", no_ablation, "skip the desk-scale ablation");
  CLI11_PARSE(app, argc, argv);

  const auto t0 = Clock::now();
  oracle_suite();
  gradient_suite();
  reductions();
  conservation();
  metrics();
  overfit();
  cli_determinism(cli, work);
  if (no_ablation) std::printf("SKIP  desk-ablation          --no-ablation given\n");
  else desk_ablation(work);

  bool hard_ok = true;
  std::size_t passed = 0;
  for (const auto& o : g_outcomes) {
    passed += o.pass ? 1 : 0;
    if (!o.soft) hard_ok = hard_ok && o.pass;
  }
  std::printf("%zu/%zu criteria passed (%.1f min); hard criteria %s\n", passed, g_outcomes.size(), seconds_since(t0) / 60,
              hard_ok ? "all passed" : "FAILED");
  return hard_ok ? 0 : 1;
}
