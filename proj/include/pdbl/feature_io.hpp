// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// PDBF feature interchange container.
//
//   "PDBF" | version u16 LE | header_len u32 LE | header (UTF-8 JSON)
//   then, for every sample in header order, every scale, every stage:
//   C*H*W little-endian float32 values, channel-major.
//
// Header keys: "sample_ids", optional "labels", "scale_count", "stage_count",
// "pyramid" ([[w,h],...], may be empty), "shapes" ([scale][stage] -> [C,H,W])
// and free-form "metadata".

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdbl/backbone.hpp"
#include "pdbl/pyramid.hpp"

namespace pdbl {

inline constexpr std::uint16_t kFeatureFormatVersion = 1;

/// [C, H, W]
using StageShape = std::array<int, 3>;

struct FeatureSample {
  std::string id;
  std::optional<std::string> label;
  /// One StageFeatures per pyramid scale.
  std::vector<StageFeatures> scales;

  friend bool operator==(const FeatureSample&, const FeatureSample&) = default;
};

struct FeatureHeader {
  std::vector<std::string> sample_ids;
  std::optional<std::vector<std::string>> labels;
  std::vector<Size> pyramid;
  /// shapes[scale][stage]
  std::vector<std::vector<StageShape>> shapes;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t scale_count() const noexcept { return shapes.size(); }
  std::size_t stage_count() const noexcept { return shapes.empty() ? 0 : shapes.front().size(); }
  /// Stage channel counts (identical across scales).
  std::vector<int> stage_channels() const;

  friend bool operator==(const FeatureHeader&, const FeatureHeader&) = default;
};

/// Shape table of one sample, for building a header from data.
std::vector<std::vector<StageShape>> shapes_of(const std::vector<StageFeatures>& scales);

/// Single-writer streaming encoder. Samples must arrive in header order.
class FeatureWriter {
 public:
  FeatureWriter(const std::filesystem::path& path, FeatureHeader header);
  void write(const FeatureSample& sample);
  /// Verifies every declared sample was written and closes the file.
  void finish();

 private:
  std::filesystem::path path_;
  FeatureHeader header_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

/// Streaming decoder; `next()` returns samples in file order.
class FeatureReader {
 public:
  explicit FeatureReader(const std::filesystem::path& path);
  const FeatureHeader& header() const noexcept { return header_; }
  std::optional<FeatureSample> next();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  FeatureHeader header_;
  std::size_t read_ = 0;
};

struct FeatureFile {
  FeatureHeader header;
  std::vector<FeatureSample> samples;
};

/// Writes all samples; the shape table is taken from the first sample and
/// every other sample must match it.
void write_features(const std::filesystem::path& path, const std::vector<FeatureSample>& samples,
                    const std::vector<Size>& pyramid = {}, const nlohmann::json& metadata = nlohmann::json::object());

FeatureFile read_features(const std::filesystem::path& path);

/// Rejects a file whose scale count (and recorded pyramid, if any) disagrees with `spec`.
void validate_pyramid(const FeatureHeader& header, const PyramidSpec& spec);

}  // namespace pdbl
