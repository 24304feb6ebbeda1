// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdbl/image.hpp"

namespace pdbl {

/// Channel-major C×H×W activation tensor tapped at the end of one backbone stage.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width);
  FeatureMap(int channels, int height, int width, std::vector<float> data);

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  float& at(int c, int y, int x) noexcept { return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x]; }
  float at(int c, int y, int x) const noexcept {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  std::span<float> plane(int c) noexcept {
    return std::span(data_).subspan(static_cast<std::size_t>(c) * height_ * width_,
                                    static_cast<std::size_t>(height_) * width_);
  }
  std::span<const float> plane(int c) const noexcept {
    return std::span(data_).subspan(static_cast<std::size_t>(c) * height_ * width_,
                                    static_cast<std::size_t>(height_) * width_);
  }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Per-stage feature maps for one image, shallowest stage first.
using StageFeatures = std::vector<FeatureMap>;

/// A staged feature extractor: image in, one tapped feature map per stage out.
///
/// Implementations must be pure: the same image always yields the same
/// features, and `extract` may be called concurrently.
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual StageFeatures extract(const Image& img) const = 0;
  /// Channel count of each stage, in order.
  virtual std::vector<int> stage_channels() const = 0;
  /// Stable description recorded in feature and model files.
  virtual std::string identifier() const = 0;
};

struct ToyBackboneConfig {
  std::uint64_t seed = 0;
  std::vector<int> stage_channels = {8, 16, 32, 64};
};

/// Deterministic convolutional stand-in for a pretrained CNN.
///
/// Each stage is conv3x3 (zero pad 1, no bias) -> ReLU -> 2x2 average pool
/// with stride 2, so stage k (1-based) has spatial size floor(input / 2^k).
/// Weights are drawn uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from
/// std::mt19937_64 seeded with `seed`, in (stage, out, in, ky, kx) order.
class ToyBackbone final : public Backbone {
 public:
  explicit ToyBackbone(ToyBackboneConfig cfg);

  StageFeatures extract(const Image& img) const override;
  std::vector<int> stage_channels() const override { return cfg_.stage_channels; }
  std::string identifier() const override;

  const ToyBackboneConfig& config() const noexcept { return cfg_; }
  /// Weights of one stage, laid out [out][in][3][3].
  std::span<const float> weights(std::size_t stage) const { return weights_.at(stage); }

 private:
  ToyBackboneConfig cfg_;
  std::vector<std::vector<float>> weights_;
};

/// Inverse of ToyBackbone::identifier(); nullopt for any other backbone description.
std::optional<ToyBackboneConfig> parse_toy_identifier(const std::string& identifier);

/// Convenience wrapper matching the free-function form of the toy extractor.
StageFeatures toy_extract(const Image& img, const ToyBackboneConfig& cfg);

}  // namespace pdbl
