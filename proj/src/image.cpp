// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/image.hpp"

#include <algorithm>
#include <string>

#include "pdbl/error.hpp"

namespace pdbl {

Image::Image(int width, int height, int channels)
    : Image(width, height, channels,
            std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
                               std::max(channels, 0))) {}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1 || channels < 1) {
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(channels));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" + std::to_string(height) +
                          "x" + std::to_string(channels));
  }
}

Image Image::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width_ || y + h > height_) {
    throw InvalidArgument("crop region outside image bounds");
  }
  Image out(w, h, channels_);
  const std::size_t row = static_cast<std::size_t>(w) * channels_;
  for (int r = 0; r < h; ++r) {
    const float* src = data_.data() + (static_cast<std::size_t>(y + r) * width_ + x) * channels_;
    std::copy(src, src + row, out.data_.data() + r * row);
  }
  return out;
}

Image to_float(std::span<const std::uint8_t> rgb, int width, int height) {
  Image out(width, height, 3);
  if (rgb.size() != out.data().size()) throw InvalidArgument("RGB buffer size mismatch");
  std::transform(rgb.begin(), rgb.end(), out.data().begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return out;
}

Image to_float(const Rgb8Image& img) { return to_float(img.data, img.width, img.height); }

}  // namespace pdbl
