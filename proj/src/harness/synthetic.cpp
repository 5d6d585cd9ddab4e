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

#include "hdf/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hdf/diffcore/init.hpp"

namespace hdf::harness {

namespace {

constexpr double kPi = std::numbers::pi;

std::string stream(Split split, std::size_t index, const char* what) {
  return to_string(split) + "/" + std::to_string(index) + "/" + what;
}

std::size_t split_total(const SyntheticSpec& spec, Split split) {
  std::size_t n = 0;
  for (std::size_t c : spec.class_counts(split == Split::kTrain ? spec.train_per_class : spec.test_per_class)) n += c;
  return n;
}

}  // namespace

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("synthetic spec: " + what); };
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (frames < 2) fail("frames must be >= 2");
  if (channels < 1 || height < 2 || width < 2) fail("channels >= 1 and height, width >= 2 required");
  if (num_sources < 1) fail("num_sources must be >= 1");
  if (train_per_class < 1 || test_per_class < 1) fail("per-class counts must be >= 1");
  if (!class_ratios.empty()) {
    if (class_ratios.size() != num_classes) fail("class_ratios needs one entry per class");
    for (double r : class_ratios)
      if (!(r > 0) || r > 1) fail("class_ratios entries must be in (0, 1]");
  }
  if (!(temporal_drift >= 0 && temporal_drift <= 1)) fail("temporal_drift must be in [0, 1]");
  if (!(hard_fraction >= 0 && hard_fraction <= 1)) fail("hard_fraction must be in [0, 1]");
  if (!(contrast_shift >= 0 && brightness_shift >= 0 && noise_shift >= 0 && noise_base >= 0)) {
    fail("style magnitudes must be >= 0");
  }
  if (!(hard_gain >= 1)) fail("hard_gain must be >= 1");
}

std::vector<std::size_t> SyntheticSpec::class_counts(std::size_t per_class) const {
  std::vector<std::size_t> counts(num_classes, per_class);
  if (class_ratios.empty()) return counts;
  for (std::size_t k = 0; k < num_classes; ++k) {
    counts[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(class_ratios[k] * static_cast<double>(per_class))));
  }
  return counts;
}

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

SourceStyle source_style(const SyntheticSpec& spec, std::size_t source) {
  ad::Rng rng(spec.seed, "source/" + std::to_string(source));
  SourceStyle st;
  st.contrast = 1.0 + spec.contrast_shift * rng.uniform(-1.0, 1.0);
  st.brightness = spec.brightness_shift * rng.uniform(-1.0, 1.0);
  st.noise = spec.noise_base + spec.noise_shift * rng.uniform();
  return st;
}

double time_warp(double u, double a) { return u + a * std::sin(kPi * u) / kPi; }

SampleInfo sample_info(const SyntheticSpec& spec, Split split, std::size_t index) {
  const auto counts = spec.class_counts(split == Split::kTrain ? spec.train_per_class : spec.test_per_class);
  SampleInfo info;
  std::size_t acc = 0;
  info.label = -1;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    acc += counts[k];
    if (index < acc) {
      info.label = static_cast<int>(k);
      break;
    }
  }
  if (info.label < 0) throw std::out_of_range("sample_info: index " + std::to_string(index) + " beyond split");
  ad::Rng rng(spec.seed, stream(split, index, "info"));
  info.source = static_cast<int>(rng.below(spec.num_sources));
  info.hard = rng.uniform() < spec.hard_fraction;
  double a = spec.temporal_drift * rng.uniform(-0.9, 0.9);
  if (info.hard) a = std::clamp(a * spec.hard_gain, -0.95, 0.95);
  info.warp = a;
  return info;
}

std::vector<float> render_sample(const SyntheticSpec& spec, Split split, std::size_t index, const SampleInfo& info) {
  const std::size_t T = spec.frames, C = spec.channels, H = spec.height, W = spec.width;
  const std::size_t K = spec.num_classes;
  const std::size_t k = static_cast<std::size_t>(info.label);
  ad::Rng rng(spec.seed, stream(split, index, "shape"));

  // Class k moves along axis theta; classes k and k + K/2 share the axis in
  // opposite directions, so only the dynamics separate them.
  const std::size_t half = (K + 1) / 2;
  const double axis = kPi * static_cast<double>(k % half) / static_cast<double>(half);
  const double dir = k < half ? 1.0 : -1.0;
  const double freq = 2.0 + static_cast<double>(k % 3);
  const double orient = axis + kPi / 4;

  // individual variation
  const double cx = 0.5 + 0.05 * rng.normal(), cy = 0.5 + 0.05 * rng.normal();
  const double radius = 0.12 * std::clamp(1.0 + 0.2 * rng.normal(), 0.5, 1.5);
  const double blob_amp = std::clamp(1.0 + 0.15 * rng.normal(), 0.5, 1.5);
  const double phase = 2 * kPi * rng.uniform();
  const double travel = 0.3 * std::clamp(1.0 + 0.15 * rng.normal(), 0.5, 1.5);

  SourceStyle st = source_style(spec, static_cast<std::size_t>(info.source));
  if (info.hard) {
    st.contrast = std::max(0.1, 1.0 + spec.hard_gain * (st.contrast - 1.0));
    st.brightness *= spec.hard_gain;
    st.noise *= spec.hard_gain;
  }

  ad::Rng noise(spec.seed, stream(split, index, "noise"));
  std::vector<float> out(T * C * H * W);
  for (std::size_t t = 0; t < T; ++t) {
    const double tau = time_warp(static_cast<double>(t) / static_cast<double>(T - 1), info.warp);
    const double s = dir * (1.0 - 2.0 * tau);
    const double bx = cx + travel * s * std::cos(axis), by = cy + travel * s * std::sin(axis);
    const double ramp = 0.2 * dir * (tau - 0.5);
    for (std::size_t c = 0; c < C; ++c) {
      const double cphase = phase + 0.5 * static_cast<double>(c);
      for (std::size_t i = 0; i < H; ++i) {
        const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(H);
        for (std::size_t j = 0; j < W; ++j) {
          const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(W);
          const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
          const double blob = blob_amp * std::exp(-d2 / (2 * radius * radius));
          const double proj = x * std::cos(orient) + y * std::sin(orient);
          const double grating = 0.3 * std::sin(2 * kPi * freq * proj + cphase + dir * 2 * kPi * tau);
          const double v = st.contrast * (blob + grating + ramp) + st.brightness + st.noise * noise.normal();
          out[((t * C + c) * H + i) * W + j] = static_cast<float>(v);
        }
      }
    }
  }
  return out;
}

Dataset generate(const SyntheticSpec& spec, Split split) {
  spec.validate();
  Dataset ds;
  ds.frames = spec.frames;
  ds.channels = spec.channels;
  ds.height = spec.height;
  ds.width = spec.width;
  const std::size_t n = split_total(spec, split);
  const std::size_t per = ds.sample_numel();
  ds.videos.resize(n * per);
  ds.labels.resize(n);
  ds.sources.resize(n);
  ds.hard.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SampleInfo info = sample_info(spec, split, i);
    const std::vector<float> clip = render_sample(spec, split, i, info);
    std::copy(clip.begin(), clip.end(), ds.videos.begin() + static_cast<std::ptrdiff_t>(i * per));
    ds.labels[i] = info.label;
    ds.sources[i] = info.source;
    ds.hard[i] = info.hard ? 1 : 0;
  }
  return ds;
}

ad::Tensor<float> Dataset::batch(const std::vector<std::size_t>& idx) const {
  const std::size_t per = sample_numel();
  ad::Tensor<float> out(ad::Shape{idx.size(), frames, channels, height, width});
  for (std::size_t b = 0; b < idx.size(); ++b) {
    if (idx[b] >= size()) throw std::out_of_range("Dataset::batch: index " + std::to_string(idx[b]));
    std::copy_n(videos.begin() + static_cast<std::ptrdiff_t>(idx[b] * per), per, out.data() + b * per);
  }
  return out;
}

std::vector<int> Dataset::batch_labels(const std::vector<std::size_t>& idx) const {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels.at(i));
  return out;
}

}  // namespace hdf::harness
