// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "pdbl/image.hpp"

namespace pdbl::io {

/// Decodes an 8-bit RGB PNG or JPEG (detected from the leading bytes).
/// Gray, palette and alpha inputs are converted to plain RGB.
Rgb8Image read_rgb(const std::filesystem::path& path);

/// Loads a patch and converts it to [0,1] floats.
Image load_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Rgb8Image& img);
void write_jpeg(const std::filesystem::path& path, const Rgb8Image& img, int quality = 95);

/// Sequential top-to-bottom scanline access to a PNG or JPEG raster, so
/// slides larger than memory can be processed in strips.
class RowReader {
 public:
  virtual ~RowReader() = default;
  virtual int width() const = 0;
  virtual int height() const = 0;
  /// Decodes the next row into `out` (width * 3 bytes). Throws FormatError past the last row.
  virtual void read_row(std::span<std::uint8_t> out) = 0;
};

std::unique_ptr<RowReader> open_rows(const std::filesystem::path& path);

/// In-memory source, used for tests and for rasters already decoded.
std::unique_ptr<RowReader> rows_of(const Rgb8Image& img);

struct PaletteEntry {
  std::uint8_t r, g, b, a;
};

/// Incremental PNG encoder. Either 8-bit RGB rows or 8-bit palette-index rows.
class PngRowWriter {
 public:
  /// RGB writer.
  PngRowWriter(const std::filesystem::path& path, int width, int height);
  /// Palette-index writer; entries with a < 255 are written to the tRNS chunk.
  PngRowWriter(const std::filesystem::path& path, int width, int height,
               std::span<const PaletteEntry> palette);
  ~PngRowWriter();
  PngRowWriter(const PngRowWriter&) = delete;
  PngRowWriter& operator=(const PngRowWriter&) = delete;

  void write_row(std::span<const std::uint8_t> row);
  /// Flushes the trailer. Must be called once every row is written.
  void finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Whole-file decode of a palette PNG to its raw indices (no palette expansion).
std::vector<std::uint8_t> read_png_indices(const std::filesystem::path& path, int& width, int& height);

}  // namespace pdbl::io
