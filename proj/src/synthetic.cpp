// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "pdbl/error.hpp"
#include "pdbl/image_io.hpp"

namespace pdbl {
namespace {

constexpr std::array<std::array<double, 3>, 8> kBaseColors = {{
    {0.92, 0.88, 0.90},
    {0.30, 0.22, 0.55},
    {0.72, 0.36, 0.55},
    {0.85, 0.62, 0.70},
    {0.55, 0.45, 0.75},
    {0.95, 0.75, 0.55},
    {0.45, 0.30, 0.35},
    {0.65, 0.70, 0.85},
}};

constexpr std::array<const char*, 8> kClassNames = {"ADI", "LYM", "TUM", "STR", "NORM", "MUC", "DEB", "MUS"};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace

Rgb8Image synthetic_patch(int cls, int size, std::uint64_t seed) {
  if (cls < 0 || cls >= static_cast<int>(kBaseColors.size())) throw InvalidArgument("synthetic class out of range");
  if (size < 1) throw InvalidArgument("synthetic patch size must be positive");
  std::mt19937_64 rng(seed);
  std::array<double, 3> mean = kBaseColors[cls];
  for (auto& m : mean) m += uniform(rng, -0.04, 0.04);
  const double angle = uniform(rng, 0.0, std::numbers::pi);
  const double period = uniform(rng, 6.0, 24.0);
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double amplitude = uniform(rng, 0.05, 0.15);
  const double ca = std::cos(angle), sa = std::sin(angle);

  Rgb8Image img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size * 3)};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double stripe = amplitude * std::sin(2.0 * std::numbers::pi * (x * ca + y * sa) / period + phase);
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(mean[c] + stripe + uniform(rng, -0.2, 0.2), 0.0, 1.0);
        img.data[(static_cast<std::size_t>(y) * size + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

Dataset write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.classes > static_cast<int>(kBaseColors.size())) {
    throw InvalidArgument("synthetic dataset supports 2 to 8 classes");
  }
  if (spec.per_class < 1) throw InvalidArgument("synthetic dataset needs at least one sample per class");
  std::filesystem::create_directories(dir / "images");
  std::mt19937_64 seeds(spec.seed);
  std::vector<Sample> samples;
  for (int i = 0; i < spec.per_class; ++i) {
    for (int c = 0; c < spec.classes; ++c) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%04d", kClassNames[c], i);
      const auto rel = std::filesystem::path("images") / (std::string(id) + ".png");
      io::write_png(dir / rel, synthetic_patch(c, spec.size, seeds()));
      samples.push_back({id, dir / rel, kClassNames[c]});
    }
  }
  Dataset ds(std::move(samples));
  // The manifest stores paths relative to its own directory.
  std::vector<Sample> relative;
  for (const auto& s : ds.samples()) relative.push_back({s.id, std::filesystem::relative(s.path, dir), s.label});
  write_manifest(dir / "manifest.csv", Dataset(std::move(relative)));
  return ds;
}

}  // namespace pdbl
