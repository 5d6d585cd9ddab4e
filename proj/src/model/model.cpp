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

#include "hdf/model.hpp"

#include <cmath>

namespace hdf::model {

using ad::Axes;

std::string to_string(Backbone b) { return b == Backbone::kTiny3dConv ? "tiny3dconv" : "identity"; }

Backbone parse_backbone(const std::string& s) {
  if (s == "tiny3dconv") return Backbone::kTiny3dConv;
  if (s == "identity") return Backbone::kIdentity;
  throw std::invalid_argument("unknown backbone '" + s + "' (tiny3dconv | identity)");
}

std::string to_string(dam::FusionNorm n) { return n == dam::FusionNorm::kRenormalize ? "renormalize" : "softmax"; }

dam::FusionNorm parse_fusion_norm(const std::string& s) {
  if (s == "renormalize") return dam::FusionNorm::kRenormalize;
  if (s == "softmax") return dam::FusionNorm::kSoftmax;
  throw std::invalid_argument("unknown fusion norm '" + s + "' (renormalize | softmax)");
}

std::string to_string(dam::VarianceAxes a) { return a == dam::VarianceAxes::kPerFrame ? "frame" : "sample"; }

dam::VarianceAxes parse_variance_axes(const std::string& s) {
  if (s == "frame") return dam::VarianceAxes::kPerFrame;
  if (s == "sample") return dam::VarianceAxes::kPerSample;
  throw std::invalid_argument("unknown variance axes '" + s + "' (frame | sample)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("model: " + what); };
  if (frames < 1 || in_channels < 1 || height < 1 || width < 1) fail("input extents must be >= 1");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (embed_dim < 1) fail("embed_dim must be >= 1");
  if (backbone == Backbone::kTiny3dConv) {
    if (channels < 1) fail("channels must be >= 1");
    if (stages < 1 || stages > 4) fail("stages must be in [1, 4]");
    if (temporal_stride < 1) fail("temporal_stride must be >= 1");
  }
  if (!(epsilon_adv >= 0)) fail("epsilon_adv must be >= 0");
}

Shape ModelConfig::feature_shape() const {
  if (backbone == Backbone::kIdentity) return {frames, in_channels, height, width};
  std::size_t t = frames, h = height, w = width;
  for (std::size_t s = 0; s < stages; ++s) {
    t = (t - 1) / temporal_stride + 1;
    h = (h - 1) / 2 + 1;
    w = (w - 1) / 2 + 1;
  }
  return {t, channels << (stages - 1), h, w};
}

namespace {

constexpr double kNormEpsilon = 1e-5;

std::string stage_name(std::size_t s) { return "backbone.stage" + std::to_string(s) + "."; }

template <typename T>
void check_finite(const Var<T>& v, const std::string& stage) {
  for (T x : v.value().vec())
    if (!std::isfinite(x)) throw NonFiniteError(stage);
}

}  // namespace

template <typename T>
ParameterSet<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParameterSet<T> set;
  auto normal = [&](const std::string& name, Shape shape, double std) {
    ad::Rng rng(seed, name);
    set.add(name, ad::normal_tensor<T>(std::move(shape), std, rng));
  };
  if (cfg.backbone == Backbone::kTiny3dConv) {
    std::size_t cin = cfg.in_channels;
    for (std::size_t s = 0; s < cfg.stages; ++s) {
      const std::size_t cout = cfg.channels << s;
      normal(stage_name(s) + "weight", Shape{cout, cin, 3, 3, 3}, std::sqrt(2.0 / static_cast<double>(cin * 27)));
      if (cfg.backbone_norm) set.add(stage_name(s) + "gain", Tensor<T>(Shape{cout, 1, 1}, T(1)));
      set.add(stage_name(s) + "bias", Tensor<T>(Shape{cout, 1, 1}));
      cin = cout;
    }
  }
  const Shape fs = cfg.feature_shape();
  const std::size_t c = fs[1];
  if (cfg.use_freq()) dam::register_freq_params(set, "dam.freq.", dam::FreqConfig{c, fs[2], fs[3], cfg.epsilon_adv, cfg.variance_axes}, seed);
  if (cfg.use_temporal()) dam::register_temporal_params(set, "dam.temporal.", dam::TemporalConfig{c}, seed);
  if (cfg.use_freq() && cfg.use_temporal()) dam::register_fusion_params(set, "dam.fusion.", dam::FusionConfig{c, cfg.fusion_norm});
  const double head_std = 1.0 / std::sqrt(static_cast<double>(c));
  normal("head.cls.weight", Shape{c, cfg.num_classes}, head_std);
  set.add("head.cls.bias", Tensor<T>(Shape{cfg.num_classes}));
  if (cfg.embed_head) {
    normal("head.embed.weight", Shape{c, cfg.embed_dim}, head_std);
    set.add("head.embed.bias", Tensor<T>(Shape{cfg.embed_dim}));
  }
  return set;
}

template <typename T>
Model<T>::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(init_params<T>(cfg, seed)), plan_(cfg.feature_shape()[2], cfg.feature_shape()[3]) {}

template <typename T>
Model<T>::Model(ModelConfig cfg, ParameterSet<T> params)
    : cfg_(cfg), params_(std::move(params)), plan_(cfg.feature_shape()[2], cfg.feature_shape()[3]) {
  const ParameterSet<T> ref = init_params<T>(cfg_, 0);
  if (ref.size() != params_.size()) {
    throw std::invalid_argument("model: expected " + std::to_string(ref.size()) + " parameters, got " +
                                std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& want = ref[i];
    if (!params_.contains(want.name)) throw std::invalid_argument("model: missing parameter " + want.name);
    const auto& got = params_.get(want.name);
    if (got.value.shape() != want.value.shape()) {
      throw std::invalid_argument("model: parameter " + want.name + " has shape " + ad::to_string(got.value.shape()) +
                                  ", expected " + ad::to_string(want.value.shape()));
    }
  }
}

template <typename T>
ModelOutput<T> Model<T>::forward(Graph<T>& g, const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.size() != 5 || s[1] != cfg_.frames || s[2] != cfg_.in_channels || s[3] != cfg_.height || s[4] != cfg_.width) {
    throw ad::ShapeError("model", "input " + ad::to_string(s) + " does not match [B," + std::to_string(cfg_.frames) +
                                      "," + std::to_string(cfg_.in_channels) + "," + std::to_string(cfg_.height) + "," +
                                      std::to_string(cfg_.width) + "]");
  }
  ModelOutput<T> out;
  Var<T> h = x;
  if (cfg_.backbone == Backbone::kTiny3dConv) {
    ad::Conv3dOptions opt;
    opt.stride = {cfg_.temporal_stride, 2, 2};
    opt.padding = {1, 1, 1};
    for (std::size_t st = 0; st < cfg_.stages; ++st) {
      const std::string name = stage_name(st);
      h = ad::conv3d(h, g.parameter(params_.get(name + "weight")), opt);
      if (cfg_.backbone_norm) {
        const Axes clip{1, 2, 3, 4};
        h = (h - ad::mean(h, clip, true)) / ad::sqrt(ad::variance(h, clip, true) + static_cast<T>(kNormEpsilon));
        h = h * g.parameter(params_.get(name + "gain"));
      }
      h = ad::silu(h + g.parameter(params_.get(name + "bias")));
      check_finite(h, name.substr(0, name.size() - 1));
    }
  }
  out.features = h;

  if (cfg_.use_freq()) {
    out.freq = dam::freq_branch(h, dam::bind_freq_params(g, params_, "dam.freq.", dam::FreqConfig{0, 0, 0, cfg_.epsilon_adv, cfg_.variance_axes}),
                                plan_, cfg_.variance_axes);
    check_finite(out.freq->x_s, "dam.freq");
  }
  if (cfg_.use_temporal()) {
    out.temporal = dam::temporal_branch(h, dam::bind_temporal_params(g, params_, "dam.temporal."));
    check_finite(out.temporal->x_t, "dam.temporal");
  }
  if (out.freq && out.temporal) {
    out.fusion = dam::fuse(out.temporal->x_t, out.freq->x_s, dam::bind_fusion_params(g, params_, "dam.fusion."), cfg_.fusion_norm);
    out.attended = out.fusion->x_fused;
    check_finite(out.attended, "dam.fusion");
  } else if (out.freq) {
    out.attended = out.freq->x_s;
  } else if (out.temporal) {
    out.attended = out.temporal->x_t;
  } else {
    out.attended = h;
  }
  heads(g, out);
  return out;
}

template <typename T>
void Model<T>::heads(Graph<T>& g, ModelOutput<T>& out) {
  out.pooled = ad::mean(out.attended, Axes{1, 3, 4});
  out.logits = ad::matmul(out.pooled, g.parameter(params_.get("head.cls.weight"))) + g.parameter(params_.get("head.cls.bias"));
  check_finite(out.logits, "head.cls");
  Var<T> e = out.pooled;
  if (cfg_.embed_head) {
    e = ad::matmul(e, g.parameter(params_.get("head.embed.weight"))) + g.parameter(params_.get("head.embed.bias"));
  }
  // The tiny floor only matters for an all-zero row.
  out.embeddings = e / ad::sqrt(ad::sum(ad::square(e), Axes{1}, true) + static_cast<T>(1e-24));
  check_finite(out.embeddings, "head.embed");
}

Variant ablation_variant(const std::string& setting, const ModelConfig& base) {
  Variant v{setting, base, false};
  auto set = [&](bool dam_on, bool freq, bool temporal, bool dsm) {
    v.model.dam_enabled = dam_on;
    v.model.freq_enabled = freq;
    v.model.temporal_enabled = temporal;
    v.model.embed_head = dsm;
    v.use_dsm = dsm;
  };
  if (setting == "a") set(false, true, true, false);
  else if (setting == "b") set(true, true, true, false);
  else if (setting == "c") set(false, true, true, true);
  else if (setting == "d") set(true, true, true, true);
  else if (setting == "freq") set(true, true, false, true);
  else if (setting == "time") set(true, false, true, true);
  else throw std::invalid_argument("unknown ablation setting '" + setting + "' (a | b | c | d | freq | time)");
  return v;
}

template class Model<float>;
template class Model<double>;
template ParameterSet<float> init_params(const ModelConfig&, std::uint64_t);
template ParameterSet<double> init_params(const ModelConfig&, std::uint64_t);

}  // namespace hdf::model
