// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "pdbl/dataset.hpp"
#include "pdbl/image.hpp"

namespace pdbl {

/// Colored-texture patches: a class-dependent mean colour, a per-image colour
/// jitter, a randomly oriented stripe texture and per-pixel noise.
struct SyntheticSpec {
  int classes = 3;  // at most 8
  int per_class = 100;
  int size = 224;
  std::uint64_t seed = 0;
};

Rgb8Image synthetic_patch(int cls, int size, std::uint64_t seed);

/// Writes `dir/images/<id>.png` and `dir/manifest.csv`, returning the dataset.
Dataset write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec);

}  // namespace pdbl
