// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/pyramid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "pdbl/error.hpp"

namespace pdbl {
namespace {

int parse_dim(std::string_view s, const std::string& whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
    throw InvalidArgument("invalid size '" + whole + "'");
  }
  return v;
}

// Source sample positions and weights along one axis.
struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> axis_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, in - 1), src - lo};
  }
  return taps;
}

}  // namespace

Size parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) {
    const int v = parse_dim(text, text);
    return {v, v};
  }
  return {parse_dim(std::string_view(text).substr(0, x), text),
          parse_dim(std::string_view(text).substr(x + 1), text)};
}

std::string to_string(const Size& s) { return std::to_string(s.width) + "x" + std::to_string(s.height); }

PyramidSpec PyramidSpec::standard() { return PyramidSpec({{224, 224}, {160, 160}, {112, 112}}); }

PyramidSpec::PyramidSpec(std::vector<Size> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) throw InvalidArgument("pyramid needs at least one scale");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (scales_[i].width < 1 || scales_[i].height < 1) {
      throw InvalidArgument("pyramid scale " + to_string(scales_[i]) + " is not positive");
    }
    if (i > 0 && scales_[i].area() >= scales_[i - 1].area()) {
      throw InvalidArgument("pyramid scales must strictly decrease in area: " + to_string(scales_[i - 1]) +
                            " then " + to_string(scales_[i]));
    }
  }
}

Image bilinear_resize(const Image& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) {
    throw InvalidArgument("resize target must be at least 1x1, got " + std::to_string(target_w) + "x" +
                          std::to_string(target_h));
  }
  if (img.empty()) throw InvalidArgument("cannot resize an empty image");
  const auto xs = axis_taps(img.width(), target_w);
  const auto ys = axis_taps(img.height(), target_h);
  const int ch = img.channels();
  Image out(target_w, target_h, ch);
  for (int y = 0; y < target_h; ++y) {
    const Tap ty = ys[y];
    for (int x = 0; x < target_w; ++x) {
      const Tap tx = xs[x];
      for (int c = 0; c < ch; ++c) {
        // Written as base + delta * frac so a zero fraction reproduces the source sample exactly.
        const double p00 = img.at(tx.lo, ty.lo, c);
        const double p01 = img.at(tx.hi, ty.lo, c);
        const double p10 = img.at(tx.lo, ty.hi, c);
        const double p11 = img.at(tx.hi, ty.hi, c);
        const double top = p00 + (p01 - p00) * tx.frac;
        const double bottom = p10 + (p11 - p10) * tx.frac;
        out.at(x, y, c) = static_cast<float>(top + (bottom - top) * ty.frac);
      }
    }
  }
  return out;
}

std::vector<Image> build_pyramid(const Image& img, const PyramidSpec& spec) {
  if (img.width() != spec.native().width || img.height() != spec.native().height) {
    throw InvalidArgument("image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " but pyramid expects native size " + to_string(spec.native()));
  }
  std::vector<Image> levels;
  levels.reserve(spec.count());
  levels.push_back(img);
  for (std::size_t i = 1; i < spec.count(); ++i) {
    levels.push_back(bilinear_resize(img, spec.scales()[i].width, spec.scales()[i].height));
  }
  return levels;
}

}  // namespace pdbl
