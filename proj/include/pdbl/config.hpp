// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration: an INI-style file of top-level keys and [sections],
// overridable key by key from the command line.
//
//   seed = 0                 threads = 1
//   [pyramid]   scales = 224x224,160x160,112x112
//   [backbone]  kind = toy | pdbf ; stage_channels = 8,16,32,64 ; features = <path>
//   [model]     lambda = 1e-8 ; d = auto | <int> ; epsilon = 1e-8
//   [split]     proportions = 0.5 ; stratified = true ; repeats = 1
//   [segment]   window = 224 ; step = 104 ; alpha = 0.5

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdbl/backbone.hpp"
#include "pdbl/broadlearn.hpp"
#include "pdbl/pyramid.hpp"

namespace pdbl {

struct Config {
  std::uint64_t seed = 0;
  int threads = 1;
  PyramidSpec pyramid = PyramidSpec::standard();
  std::string backbone_kind = "toy";
  std::vector<int> stage_channels = {8, 16, 32, 64};
  std::optional<std::filesystem::path> features;
  FitConfig fit;
  std::vector<double> proportions = {0.5};
  bool stratified = true;
  int repeats = 1;
  int window = 224;
  int step = 104;
  double alpha = 0.5;

  ToyBackboneConfig toy() const { return {seed, stage_channels}; }
};

/// Flat "key" / "section.key" -> value map.
using ConfigValues = std::map<std::string, std::string>;

/// Parses INI text into a flat map; syntax errors throw ConfigError.
ConfigValues parse_config_text(const std::string& text);
ConfigValues read_config_file(const std::filesystem::path& path);

/// Validates every key, collecting all violations (unknown keys included)
/// into a single ConfigError. `overrides` wins over `values`.
Config make_config(const ConfigValues& values, const ConfigValues& overrides = {});

}  // namespace pdbl
