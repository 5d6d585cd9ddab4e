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

#include "hdf/harness/train.hpp"

#include <cmath>
#include <numeric>

#include "hdf/diffcore/init.hpp"

namespace hdf::harness {

using ad::Tensor;
using model::Model;
using model::Variant;

model::Variant resolve_variant(const RunConfig& cfg, const std::string& setting) {
  const model::ModelConfig base = cfg.model_for_data();
  if (setting == "custom") return Variant{"custom", base, base.embed_head};
  return model::ablation_variant(setting, base);
}

LossParts training_loss(Model<float>& m, ad::Graph<float>& g, const Tensor<float>& x, const std::vector<int>& labels,
                        const Variant& variant, const dsm::DsmConfig& dsm_cfg, const dsm::ScalingState& scaling) {
  LossParts parts;
  model::ModelOutput<float> out = m.forward(g, x);
  parts.ce = dsm::cross_entropy(out.logits, labels);
  if (out.fusion) {
    const auto& lt = out.fusion->lambda_t.value();
    const auto& ls = out.fusion->lambda_s.value();
    for (std::size_t i = 0; i < lt.size(); ++i) {
      parts.fusion_sum_error = std::max(parts.fusion_sum_error, std::abs(static_cast<double>(lt[i]) + ls[i] - 1.0));
    }
  }
  if (!variant.use_dsm) {
    parts.total = parts.ce;
    return parts;
  }
  const auto r = dsm::ib_dsc_loss(out.embeddings, labels, dsm_cfg);
  parts.sc = r.loss;
  parts.degenerate = r.degenerate;
  parts.total = dsm::total_loss(parts.ce, parts.sc, scaling);
  return parts;
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  ad::Rng rng(seed, "shuffle/" + std::to_string(epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

// CE-only settings train on the plain loss: lambda_ce = 1, lambda_sc = 0.
dsm::ScalingState fixed_ce_scaling() { return dsm::ScalingState{0.0, 1.0, 0.0}; }

struct Stepper {
  const RunConfig& cfg;
  const Variant& variant;
  Model<float>& model;
  AdamW opt;
  dsm::ScalingState scaling;
  std::size_t step = 0;

  Stepper(const RunConfig& c, const Variant& v, Model<float>& m)
      : cfg(c), variant(v), model(m), opt(c.optim),
        scaling(v.use_dsm ? dsm::initial_scaling(c.dsm) : fixed_ce_scaling()) {}

  StepRecord run(const Tensor<float>& x, const std::vector<int>& labels, double lr, std::size_t epoch) {
    StepRecord rec;
    rec.epoch = epoch;
    rec.step = step;
    rec.lr = lr;
    rec.scaling = scaling;
    auto& params = model.params();
    params.zero_grad();
    ad::Graph<float> g;
    const LossParts parts = training_loss(model, g, x, labels, variant, cfg.dsm, scaling);
    rec.loss = parts.total.item();
    rec.ce = parts.ce.item();
    rec.sc = parts.sc.valid() ? parts.sc.item() : 0.0;
    rec.degenerate = parts.degenerate;
    rec.fusion_sum_error = parts.fusion_sum_error;
    if (!std::isfinite(rec.loss)) {
      throw TrainingAborted("non-finite loss at step " + std::to_string(step), params, step);
    }
    g.backward(parts.total);
    rec.grad_norm = params.grad_norm();
    if (!std::isfinite(rec.grad_norm)) {
      throw TrainingAborted("non-finite gradient at step " + std::to_string(step), params, step);
    }
    opt.step(params, lr);
    if (variant.use_dsm) scaling = dsm::update_scaling(scaling, rec.grad_norm, cfg.dsm);
    ++step;
    return rec;
  }
};

}  // namespace

TrainResult train(const RunConfig& cfg, const Variant& variant, std::uint64_t seed, const Dataset& train_set,
                  const Dataset* test, const TrainSinks& sinks) {
  cfg.validate();
  Model<float> model(variant.model, seed);
  const std::size_t bs = cfg.train.batch_size;
  const std::size_t n = train_set.size();
  std::size_t steps_per_epoch = n / bs + (n % bs >= 2 ? 1 : 0);
  if (steps_per_epoch == 0) throw std::invalid_argument("train: fewer than 2 training samples");
  const CosineSchedule schedule(cfg.optim, steps_per_epoch);
  Stepper stepper(cfg, variant, model);

  TrainResult res;
  res.variant = variant;
  res.seed = seed;
  for (std::size_t epoch = 0; epoch < cfg.optim.epochs; ++epoch) {
    const auto order = shuffled(n, seed, epoch);
    EpochRecord er;
    er.epoch = epoch;
    std::size_t count = 0;
    for (std::size_t start = 0; start + 2 <= n; start += bs) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + bs)));
      const double lr = schedule.at(stepper.step);
      const StepRecord rec = stepper.run(train_set.batch(idx), train_set.batch_labels(idx), lr, epoch);
      if (sinks.steps) *sinks.steps << to_json(rec).dump() << "\n";
      er.lr = lr;
      er.loss += rec.loss;
      er.ce += rec.ce;
      er.sc += rec.sc;
      er.grad_norm += rec.grad_norm;
      er.lambda_ce += rec.scaling.lambda_ce;
      er.lambda_sc += rec.scaling.lambda_sc;
      ++count;
      res.steps.push_back(rec);
    }
    const double inv = 1.0 / static_cast<double>(count);
    er.loss *= inv;
    er.ce *= inv;
    er.sc *= inv;
    er.grad_norm *= inv;
    er.lambda_ce *= inv;
    er.lambda_sc *= inv;
    if (test) {
      er.test = evaluate(model, *test);
      er.has_test = true;
    }
    if (sinks.epochs) {
      nlohmann::json j = to_json(er);
      j["setting"] = variant.setting;
      j["seed"] = seed;
      *sinks.epochs << j.dump() << "\n";
    }
    res.epochs.push_back(std::move(er));
  }
  if (sinks.epochs) {
    nlohmann::json summary = {{"type", "summary"}, {"setting", variant.setting}, {"seed", seed},
                              {"steps", stepper.step}, {"parameters", model.params().element_count()}};
    if (!res.epochs.empty() && res.epochs.back().has_test) summary["test"] = to_json(res.epochs.back().test);
    *sinks.epochs << summary.dump() << "\n";
  }
  res.params = model.params();
  return res;
}

std::vector<StepRecord> overfit(const RunConfig& cfg, const Variant& variant, std::uint64_t seed, const Dataset& data,
                                const std::vector<std::size_t>& batch, std::size_t steps, double lr) {
  Model<float> model(variant.model, seed);
  Stepper stepper(cfg, variant, model);
  const Tensor<float> x = data.batch(batch);
  const std::vector<int> labels = data.batch_labels(batch);
  std::vector<StepRecord> out;
  for (std::size_t s = 0; s < steps; ++s) out.push_back(stepper.run(x, labels, lr, 0));
  return out;
}

MetricsReport evaluate(Model<float>& m, const Dataset& data, std::size_t batch, std::vector<int>* predictions) {
  std::vector<int> preds;
  preds.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += batch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(data.size(), start + batch); ++i) idx.push_back(i);
    ad::Graph<float> g(false);
    const auto out = m.forward(g, data.batch(idx));
    const auto& lv = out.logits.value();
    const std::size_t k = lv.shape()[1];
    for (std::size_t b = 0; b < idx.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (lv[b * k + c] > lv[b * k + best]) best = c;
      preds.push_back(static_cast<int>(best));
    }
  }
  MetricsReport r = compute_metrics(preds, data.labels, m.config().num_classes);
  if (predictions) *predictions = std::move(preds);
  return r;
}

Tensor<float> compute_embeddings(Model<float>& m, const Dataset& data, std::size_t batch) {
  std::vector<float> rows;
  std::size_t d = 0;
  for (std::size_t start = 0; start < data.size(); start += batch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(data.size(), start + batch); ++i) idx.push_back(i);
    ad::Graph<float> g(false);
    const auto out = m.forward(g, data.batch(idx));
    d = out.embeddings.shape()[1];
    rows.insert(rows.end(), out.embeddings.value().vec().begin(), out.embeddings.value().vec().end());
  }
  return Tensor<float>(ad::Shape{data.size(), d}, std::move(rows));
}

nlohmann::json to_json(const StepRecord& r) {
  return {{"type", "step"},
          {"epoch", r.epoch},
          {"step", r.step},
          {"lr", r.lr},
          {"loss", r.loss},
          {"ce", r.ce},
          {"sc", r.sc},
          {"grad_norm", r.grad_norm},
          {"g", r.scaling.g},
          {"lambda_ce", r.scaling.lambda_ce},
          {"lambda_sc", r.scaling.lambda_sc},
          {"degenerate", r.degenerate},
          {"fusion_sum_error", r.fusion_sum_error}};
}

nlohmann::json to_json(const EpochRecord& r) {
  nlohmann::json j = {{"type", "epoch"},          {"epoch", r.epoch},         {"lr", r.lr},
                      {"loss", r.loss},           {"ce", r.ce},               {"sc", r.sc},
                      {"grad_norm", r.grad_norm}, {"lambda_ce", r.lambda_ce}, {"lambda_sc", r.lambda_sc}};
  if (r.has_test) {
    j["test_war"] = r.test.war;
    j["test_uar"] = r.test.uar;
  }
  return j;
}

}  // namespace hdf::harness
