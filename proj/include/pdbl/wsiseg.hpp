// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// Whole-slide segmentation: classify overlapping windows and give each pixel
// the plurality class of the windows covering it.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pdbl/backbone.hpp"
#include "pdbl/broadlearn.hpp"
#include "pdbl/image.hpp"
#include "pdbl/image_io.hpp"
#include "pdbl/pyramid.hpp"

namespace pdbl {

inline constexpr int kDefaultWindow = 224;
inline constexpr int kDefaultStep = 104;

struct WindowPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const WindowPos&, const WindowPos&) = default;
};

/// 0, step, 2 step, ... while the window fits; if the last one stops short of
/// the edge, one more position at length - window is appended. Requires
/// 1 <= step <= window <= length.
std::vector<int> axis_positions(int length, int window, int step);

/// Row-major (y outer, x inner) product of the axis positions.
std::vector<WindowPos> sliding_windows(int width, int height, int window = kDefaultWindow, int step = kDefaultStep);

/// Plurality over class votes; ties go to the lowest class index.
int resolve_votes(std::span<const int> votes, int classes);

/// Per-pixel class raster.
struct LabelMap {
  static constexpr std::uint16_t kUnvoted = 0xFFFF;

  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;

  std::uint16_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Window classifications on the sliding grid, from which per-pixel votes are derived.
class VoteGrid {
 public:
  VoteGrid(int width, int height, int window, int step, int classes);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int classes() const noexcept { return classes_; }
  const std::vector<int>& xs() const noexcept { return xs_; }
  const std::vector<int>& ys() const noexcept { return ys_; }
  std::size_t window_count() const noexcept { return xs_.size() * ys_.size(); }

  void set(std::size_t ix, std::size_t iy, int label);
  int get(std::size_t ix, std::size_t iy) const { return labels_[iy * xs_.size() + ix]; }

  /// Votes per class at a pixel.
  std::vector<int> votes_at(int x, int y) const;
  std::uint16_t label_at(int x, int y) const;
  /// Fills one output row of labels.
  void label_row(int y, std::span<std::uint16_t> out) const;

  LabelMap to_label_map() const;

 private:
  struct Range {
    int lo = 0;  // inclusive
    int hi = -1; // inclusive
    friend bool operator==(const Range&, const Range&) = default;
  };
  static std::vector<Range> covering(const std::vector<int>& positions, int length, int window);
  std::uint16_t resolve(Range rx, Range ry, std::vector<int>& scratch) const;

  int width_, height_, window_, classes_;
  std::vector<int> xs_, ys_;
  std::vector<Range> xrange_, yrange_;
  std::vector<int> labels_;
};

/// Classifies one patch with the full pyramid -> backbone -> DB-block -> model chain.
int classify_patch(const Image& patch, const PdblModel& model, const Backbone& backbone, const PyramidSpec& spec);

struct SegmentOptions {
  int window = kDefaultWindow;
  int step = kDefaultStep;
  int threads = 1;
};

/// Streams the slide top to bottom, keeping at most window + step rows resident.
VoteGrid segment(io::RowReader& slide, const PdblModel& model, const Backbone& backbone, const PyramidSpec& spec,
                 const SegmentOptions& opts = {});

/// Fixed 16-entry class palette; class k uses entry k % 16.
const std::array<io::PaletteEntry, 16>& class_palette();

/// round-half-up((1 - alpha) * slide + alpha * palette); unvoted pixels keep the slide colour.
Rgb8Image overlay(const Rgb8Image& slide, const LabelMap& labels, double alpha);

/// Palette-indexed PNG; index 255 marks unvoted pixels and is fully transparent.
void write_label_png(const std::filesystem::path& path, const VoteGrid& grid);

/// Streams the slide again and writes the blended overlay PNG.
void write_overlay_png(const std::filesystem::path& path, io::RowReader& slide, const VoteGrid& grid, double alpha);

}  // namespace pdbl
