// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/wsiseg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "pdbl/dbblock.hpp"
#include "pdbl/error.hpp"
#include "pdbl/parallel.hpp"

namespace pdbl {

std::vector<int> axis_positions(int length, int window, int step) {
  if (window < 1 || step < 1) throw InvalidArgument("window and step must be >= 1");
  if (step > window) {
    throw InvalidArgument("step " + std::to_string(step) + " exceeds window " + std::to_string(window) +
                          "; windows would leave gaps");
  }
  if (window > length) {
    throw InvalidArgument("window " + std::to_string(window) + " is larger than the slide extent " + std::to_string(length));
  }
  std::vector<int> pos;
  for (int p = 0; p + window <= length; p += step) pos.push_back(p);
  if (pos.back() + window < length) pos.push_back(length - window);
  return pos;
}

std::vector<WindowPos> sliding_windows(int width, int height, int window, int step) {
  const auto xs = axis_positions(width, window, step);
  const auto ys = axis_positions(height, window, step);
  std::vector<WindowPos> out;
  out.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) out.push_back({x, y});
  return out;
}

int resolve_votes(std::span<const int> votes, int classes) {
  if (classes < 1) throw InvalidArgument("vote resolution needs at least one class");
  std::vector<int> tally(classes, 0);
  for (int v : votes) {
    if (v < 0 || v >= classes) throw InvalidArgument("vote for class " + std::to_string(v) + " outside class set");
    ++tally[v];
  }
  return static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
}

VoteGrid::VoteGrid(int width, int height, int window, int step, int classes)
    : width_(width),
      height_(height),
      window_(window),
      classes_(classes),
      xs_(axis_positions(width, window, step)),
      ys_(axis_positions(height, window, step)),
      xrange_(covering(xs_, width, window)),
      yrange_(covering(ys_, height, window)),
      labels_(xs_.size() * ys_.size(), -1) {
  if (classes < 1 || classes >= LabelMap::kUnvoted) throw InvalidArgument("class count out of range for a label map");
}

std::vector<VoteGrid::Range> VoteGrid::covering(const std::vector<int>& positions, int length, int window) {
  std::vector<Range> out(length);
  const int n = static_cast<int>(positions.size());
  int lo = 0, hi = -1;
  for (int p = 0; p < length; ++p) {
    while (hi + 1 < n && positions[hi + 1] <= p) ++hi;
    while (lo < n && positions[lo] + window <= p) ++lo;
    out[p] = {lo, hi};
  }
  return out;
}

void VoteGrid::set(std::size_t ix, std::size_t iy, int label) {
  if (label < 0 || label >= classes_) throw InvalidArgument("window label outside class set");
  labels_.at(iy * xs_.size() + ix) = label;
}

std::vector<int> VoteGrid::votes_at(int x, int y) const {
  std::vector<int> counts(classes_, 0);
  const Range rx = xrange_.at(x), ry = yrange_.at(y);
  for (int j = ry.lo; j <= ry.hi; ++j)
    for (int i = rx.lo; i <= rx.hi; ++i) {
      const int l = get(i, j);
      if (l >= 0) ++counts[l];
    }
  return counts;
}

std::uint16_t VoteGrid::resolve(Range rx, Range ry, std::vector<int>& scratch) const {
  scratch.assign(classes_, 0);
  int total = 0;
  for (int j = ry.lo; j <= ry.hi; ++j)
    for (int i = rx.lo; i <= rx.hi; ++i) {
      const int l = get(i, j);
      if (l >= 0) ++scratch[l], ++total;
    }
  if (total == 0) return LabelMap::kUnvoted;
  return static_cast<std::uint16_t>(std::max_element(scratch.begin(), scratch.end()) - scratch.begin());
}

std::uint16_t VoteGrid::label_at(int x, int y) const {
  std::vector<int> scratch;
  return resolve(xrange_.at(x), yrange_.at(y), scratch);
}

void VoteGrid::label_row(int y, std::span<std::uint16_t> out) const {
  if (out.size() != static_cast<std::size_t>(width_)) throw InvalidArgument("label row size mismatch");
  std::vector<int> scratch;
  const Range ry = yrange_.at(y);
  Range prev{0, -2};
  std::uint16_t cached = LabelMap::kUnvoted;
  for (int x = 0; x < width_; ++x) {
    if (!(xrange_[x] == prev)) {
      prev = xrange_[x];
      cached = resolve(prev, ry, scratch);
    }
    out[x] = cached;
  }
}

LabelMap VoteGrid::to_label_map() const {
  LabelMap m{width_, height_, std::vector<std::uint16_t>(static_cast<std::size_t>(width_) * height_)};
  for (int y = 0; y < height_; ++y) {
    label_row(y, std::span(m.data).subspan(static_cast<std::size_t>(y) * width_, width_));
  }
  return m;
}

int classify_patch(const Image& patch, const PdblModel& model, const Backbone& backbone, const PyramidSpec& spec) {
  const std::vector<std::vector<double>> row{pyramidal_feature(patch, spec, backbone)};
  return predict(model, stack_rows(row)).labels.front();
}

VoteGrid segment(io::RowReader& slide, const PdblModel& model, const Backbone& backbone, const PyramidSpec& spec,
                 const SegmentOptions& opts) {
  if (spec.native() != Size{opts.window, opts.window}) {
    throw InvalidArgument("window " + std::to_string(opts.window) + " must equal the pyramid's native size " +
                          to_string(spec.native()));
  }
  if (model.classes() < 2) throw InvalidArgument("segmentation model needs at least two classes");
  const int w = slide.width();
  const int h = slide.height();
  VoteGrid grid(w, h, opts.window, opts.step, static_cast<int>(model.classes()));
  const std::size_t stride = static_cast<std::size_t>(w) * 3;

  // Rows [base, base + strip.size()) of the slide.
  std::deque<std::vector<std::uint8_t>> strip;
  int base = 0;
  int next_row = 0;
  const auto& xs = grid.xs();
  for (std::size_t iy = 0; iy < grid.ys().size(); ++iy) {
    const int y = grid.ys()[iy];
    while (next_row < y + opts.window) {
      strip.emplace_back(stride);
      slide.read_row(strip.back());
      ++next_row;
    }
    while (base < y) {
      strip.pop_front();
      ++base;
    }

    std::vector<std::vector<double>> rows(xs.size());
    parallel_for(xs.size(), opts.threads, [&](std::size_t ix) {
      Image patch(opts.window, opts.window, 3);
      auto dst = patch.data();
      const std::size_t span = static_cast<std::size_t>(opts.window) * 3;
      for (int r = 0; r < opts.window; ++r) {
        const std::uint8_t* src = strip[static_cast<std::size_t>(y - base + r)].data() + static_cast<std::size_t>(xs[ix]) * 3;
        for (std::size_t k = 0; k < span; ++k) dst[r * span + k] = static_cast<float>(src[k]) / 255.0f;
      }
      rows[ix] = pyramidal_feature(patch, spec, backbone);
    });
    const auto pred = predict(model, stack_rows(rows));
    for (std::size_t ix = 0; ix < xs.size(); ++ix) grid.set(ix, iy, pred.labels[ix]);
  }

  // Every pixel lies under at least one window by construction of the clamped positions.
  if (grid.label_at(w - 1, h - 1) == LabelMap::kUnvoted || grid.label_at(0, 0) == LabelMap::kUnvoted) {
    throw std::logic_error("sliding-window grid left pixels uncovered");
  }
  return grid;
}

const std::array<io::PaletteEntry, 16>& class_palette() {
  static const std::array<io::PaletteEntry, 16> palette = {{
      {255, 0, 0, 255},     {0, 160, 0, 255},     {0, 0, 255, 255},     {255, 200, 0, 255},
      {0, 200, 200, 255},   {200, 0, 200, 255},   {255, 128, 0, 255},   {128, 0, 255, 255},
      {128, 128, 0, 255},   {0, 128, 128, 255},   {128, 0, 0, 255},     {0, 0, 128, 255},
      {255, 128, 192, 255}, {128, 255, 128, 255}, {160, 160, 160, 255}, {96, 64, 32, 255},
  }};
  return palette;
}

namespace {

std::uint8_t blend(std::uint8_t slide, std::uint8_t color, double alpha) {
  const double v = (1.0 - alpha) * slide + alpha * color;
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void blend_row(std::span<std::uint8_t> rgb, std::span<const std::uint16_t> labels, double alpha) {
  const auto& pal = class_palette();
  for (std::size_t x = 0; x < labels.size(); ++x) {
    if (labels[x] == LabelMap::kUnvoted) continue;
    const auto& c = pal[labels[x] % pal.size()];
    rgb[x * 3 + 0] = blend(rgb[x * 3 + 0], c.r, alpha);
    rgb[x * 3 + 1] = blend(rgb[x * 3 + 1], c.g, alpha);
    rgb[x * 3 + 2] = blend(rgb[x * 3 + 2], c.b, alpha);
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("overlay alpha must be in [0, 1]");
}

}  // namespace

Rgb8Image overlay(const Rgb8Image& slide, const LabelMap& labels, double alpha) {
  check_alpha(alpha);
  if (slide.width != labels.width || slide.height != labels.height) {
    throw InvalidArgument("dimension mismatch between slide and label map");
  }
  Rgb8Image out = slide;
  const std::size_t w = static_cast<std::size_t>(slide.width);
  for (int y = 0; y < slide.height; ++y) {
    blend_row(std::span(out.data).subspan(y * w * 3, w * 3), std::span(labels.data).subspan(y * w, w), alpha);
  }
  return out;
}

void write_label_png(const std::filesystem::path& path, const VoteGrid& grid) {
  if (grid.classes() > 255) throw InvalidArgument("label PNG supports at most 255 classes");
  std::vector<io::PaletteEntry> palette(256);
  for (std::size_t i = 0; i < palette.size(); ++i) palette[i] = class_palette()[i % class_palette().size()];
  palette[255] = {0, 0, 0, 0};
  io::PngRowWriter writer(path, grid.width(), grid.height(), palette);
  std::vector<std::uint16_t> labels(grid.width());
  std::vector<std::uint8_t> row(grid.width());
  for (int y = 0; y < grid.height(); ++y) {
    grid.label_row(y, labels);
    for (int x = 0; x < grid.width(); ++x) {
      row[x] = labels[x] == LabelMap::kUnvoted ? 255 : static_cast<std::uint8_t>(labels[x]);
    }
    writer.write_row(row);
  }
  writer.finish();
}

void write_overlay_png(const std::filesystem::path& path, io::RowReader& slide, const VoteGrid& grid, double alpha) {
  check_alpha(alpha);
  if (slide.width() != grid.width() || slide.height() != grid.height()) {
    throw InvalidArgument("dimension mismatch between slide and label grid");
  }
  io::PngRowWriter writer(path, grid.width(), grid.height());
  std::vector<std::uint16_t> labels(grid.width());
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(grid.width()) * 3);
  for (int y = 0; y < grid.height(); ++y) {
    slide.read_row(rgb);
    grid.label_row(y, labels);
    blend_row(rgb, labels, alpha);
    writer.write_row(rgb);
  }
  writer.finish();
}

}  // namespace pdbl
