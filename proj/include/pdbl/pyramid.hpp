// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "pdbl/image.hpp"

namespace pdbl {

struct Size {
  int width = 0;
  int height = 0;

  long long area() const noexcept { return static_cast<long long>(width) * height; }
  friend bool operator==(const Size&, const Size&) = default;
};

/// Parses "224x224" (also accepts a bare "224" for square sizes).
Size parse_size(const std::string& text);
std::string to_string(const Size& s);

/// Ordered pyramid resolutions. Entry 0 is the native patch size; areas strictly decrease.
class PyramidSpec {
 public:
  /// 224, 160, 112 square scales.
  static PyramidSpec standard();

  explicit PyramidSpec(std::vector<Size> scales);

  const std::vector<Size>& scales() const noexcept { return scales_; }
  std::size_t count() const noexcept { return scales_.size(); }
  const Size& native() const noexcept { return scales_.front(); }

  friend bool operator==(const PyramidSpec&, const PyramidSpec&) = default;

 private:
  std::vector<Size> scales_;
};

/// Bilinear resampling with pixel-centre (align-corners = false) mapping:
/// src = (dst + 0.5) * (in / out) - 0.5, clamped to [0, in - 1].
Image bilinear_resize(const Image& img, int target_w, int target_h);

/// Element i is `img` resampled to spec.scales()[i]; element 0 is the input unchanged.
std::vector<Image> build_pyramid(const Image& img, const PyramidSpec& spec);

}  // namespace pdbl
