// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end flow: patches -> pyramidal features -> fit/predict -> metrics,
// and the repeated proportion-split experiment harness built on it.

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pdbl/backbone.hpp"
#include "pdbl/broadlearn.hpp"
#include "pdbl/dataset.hpp"
#include "pdbl/metrics.hpp"
#include "pdbl/pyramid.hpp"

namespace pdbl {

/// Pyramidal features of a dataset, one row per sample in dataset order.
struct FeatureSet {
  Matrix rows;
  Provenance provenance;
};

FeatureSet build_features(const Dataset& ds, const PyramidSpec& spec, const Backbone& backbone, int threads = 1);

/// Reads a PDBF file and aggregates the rows for every dataset sample (matched by id).
/// Extra samples in the file are ignored; a missing one is an error.
FeatureSet load_features(const Dataset& ds, const std::filesystem::path& pdbf, const PyramidSpec& spec);

/// Where experiment features come from: the built-in backbone or a PDBF file.
using FeatureSource = std::variant<ToyBackboneConfig, std::filesystem::path>;

FeatureSet obtain_features(const Dataset& ds, const PyramidSpec& spec, const FeatureSource& source, int threads = 1);

/// Row subset in the given order.
Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& indices);

struct ExperimentConfig {
  PyramidSpec pyramid = PyramidSpec::standard();
  std::vector<double> proportions = {0.5};
  std::uint64_t seed = 0;
  bool stratified = true;
  int repeats = 1;
  FitConfig fit;
  int threads = 1;
};

struct FoldResult {
  double proportion = 0.0;
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  Eigen::Index p = 0;
  Eigen::Index d = 0;
  double ridge_residual = 0.0;
  EvalReport report;
};

struct ProportionSummary {
  double proportion = 0.0;
  FoldStatistics stats;
};

struct ExperimentResult {
  std::vector<FoldResult> folds;
  /// Present for each proportion when repeats > 1.
  std::vector<ProportionSummary> summaries;

  /// One JSON object per (proportion, fold), then one summary object per proportion when repeats > 1.
  std::vector<nlohmann::json> records() const;
  std::string to_jsonl() const;
};

/// Fits on the training rows of every fold and evaluates on the test rows.
ExperimentResult run_experiment(const Dataset& ds, const FeatureSet& features, const ExperimentConfig& cfg);

ExperimentResult run_experiment(const Dataset& ds, const FeatureSource& source, const ExperimentConfig& cfg);

}  // namespace pdbl
