// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pdbl {

/// Row-major, channel-interleaved floating-point raster with samples in [0,1].
///
/// Classification patches always carry 3 channels; other channel counts are
/// accepted so the resampler can be exercised on single-plane data.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 3);
  Image(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int x, int y, int c) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  /// Copies the w×h region whose top-left corner is (x, y).
  Image crop(int x, int y, int w, int h) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// 8-bit interleaved RGB raster, the on-disk representation of patches and slides.
struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  friend bool operator==(const Rgb8Image&, const Rgb8Image&) = default;
};

/// x / 255 per sample.
Image to_float(const Rgb8Image& img);
/// Converts a span of interleaved 8-bit RGB rows into a float image.
Image to_float(std::span<const std::uint8_t> rgb, int width, int height);

}  // namespace pdbl
