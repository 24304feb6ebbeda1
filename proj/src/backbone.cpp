// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "pdbl/error.hpp"

namespace pdbl {

FeatureMap::FeatureMap(int channels, int height, int width)
    : FeatureMap(channels, height, width,
                 std::vector<float>(static_cast<std::size_t>(std::max(channels, 0)) * std::max(height, 0) *
                                    std::max(width, 0))) {}

FeatureMap::FeatureMap(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels < 1 || height < 0 || width < 0) {
    throw InvalidArgument("feature map shape must have C >= 1 and non-negative H, W");
  }
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw InvalidArgument("feature map data length does not match C*H*W");
  }
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// 3x3 convolution, zero padding 1, accumulating into `out` (H×W, pre-zeroed).
void conv3x3_accumulate(std::span<const float> in, std::span<float> out, int h, int w, const float* k) {
  for (int ky = 0; ky < 3; ++ky) {
    const int y0 = std::max(0, 1 - ky);
    const int y1 = std::min(h, h + 1 - ky);
    for (int kx = 0; kx < 3; ++kx) {
      const float wt = k[ky * 3 + kx];
      const int x0 = std::max(0, 1 - kx);
      const int x1 = std::min(w, w + 1 - kx);
      for (int y = y0; y < y1; ++y) {
        const float* src = in.data() + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
        float* dst = out.data() + static_cast<std::size_t>(y) * w;
        for (int x = x0; x < x1; ++x) dst[x] += wt * src[x];
      }
    }
  }
}

}  // namespace

ToyBackbone::ToyBackbone(ToyBackboneConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.stage_channels.empty()) throw InvalidArgument("toy backbone needs at least one stage");
  std::mt19937_64 rng(cfg_.seed);
  int in_ch = 3;
  for (int out_ch : cfg_.stage_channels) {
    if (out_ch < 1) throw InvalidArgument("toy backbone stage channel counts must be >= 1");
    const int fan_in = in_ch * 9;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<float> w(static_cast<std::size_t>(out_ch) * fan_in);
    for (auto& v : w) v = static_cast<float>((2.0 * unit_uniform(rng) - 1.0) * bound);
    weights_.push_back(std::move(w));
    in_ch = out_ch;
  }
}

std::string ToyBackbone::identifier() const {
  return nlohmann::json{{"kind", "toy"}, {"seed", cfg_.seed}, {"stage_channels", cfg_.stage_channels}}.dump();
}

StageFeatures ToyBackbone::extract(const Image& img) const {
  const int stages = static_cast<int>(cfg_.stage_channels.size());
  if (img.channels() != 3) throw InvalidArgument("toy backbone expects 3-channel images");
  if ((img.width() >> stages) < 1 || (img.height() >> stages) < 1) {
    throw InvalidArgument("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " is too small for " + std::to_string(stages) + " pooling stages");
  }

  // Interleaved RGB -> planar.
  FeatureMap cur(3, img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) cur.at(c, y, x) = img.at(x, y, c);

  StageFeatures out;
  out.reserve(stages);
  for (int s = 0; s < stages; ++s) {
    const int in_ch = cur.channels();
    const int out_ch = cfg_.stage_channels[s];
    const int h = cur.height();
    const int w = cur.width();
    const auto& wts = weights_[s];
    const int ph = h / 2;
    const int pw = w / 2;
    FeatureMap pooled(out_ch, ph, pw);
    std::vector<float> acc(static_cast<std::size_t>(h) * w);
    for (int o = 0; o < out_ch; ++o) {
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (int i = 0; i < in_ch; ++i) {
        conv3x3_accumulate(cur.plane(i), acc, h, w, wts.data() + (static_cast<std::size_t>(o) * in_ch + i) * 9);
      }
      for (auto& v : acc) v = std::max(v, 0.0f);
      auto dst = pooled.plane(o);
      for (int y = 0; y < ph; ++y) {
        const float* r0 = acc.data() + static_cast<std::size_t>(2 * y) * w;
        const float* r1 = r0 + w;
        for (int x = 0; x < pw; ++x) {
          dst[static_cast<std::size_t>(y) * pw + x] = 0.25f * ((r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]));
        }
      }
    }
    out.push_back(pooled);
    cur = std::move(pooled);
  }
  return out;
}

std::optional<ToyBackboneConfig> parse_toy_identifier(const std::string& identifier) {
  const auto j = nlohmann::json::parse(identifier, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("kind", "") != "toy") return std::nullopt;
  try {
    return ToyBackboneConfig{j.at("seed").get<std::uint64_t>(), j.at("stage_channels").get<std::vector<int>>()};
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

StageFeatures toy_extract(const Image& img, const ToyBackboneConfig& cfg) { return ToyBackbone(cfg).extract(img); }

}  // namespace pdbl
