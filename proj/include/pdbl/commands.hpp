// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// The `pdbl` command set. Each command returns the JSON summary the CLI
// prints; `run_cli` adds argument parsing and maps errors to exit codes
// (0 success, 1 runtime/numeric/format, 2 usage/validation).

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "pdbl/config.hpp"

namespace pdbl {

/// Manifest images -> PDBF file with every pyramid scale and stage.
nlohmann::json cmd_extract(const std::filesystem::path& manifest, const Config& cfg, const std::filesystem::path& out);

/// PDBF features + labelled manifest -> PDBM model.
nlohmann::json cmd_fit(const std::filesystem::path& features, const std::filesystem::path& manifest, const Config& cfg,
                       const std::filesystem::path& out);

/// Predictions document: {"class_names": [...], "predictions": [{"sample_id", "label", "scores"}]}.
nlohmann::json predict_features(const std::filesystem::path& model, const std::filesystem::path& features);

/// Writes the predictions document to `out` when given and returns a summary; otherwise returns the document.
nlohmann::json cmd_predict(const std::filesystem::path& model, const std::filesystem::path& features,
                           const std::optional<std::filesystem::path>& out);

/// Predictions document + labelled manifest -> evaluation report.
nlohmann::json cmd_eval(const std::filesystem::path& predictions, const std::filesystem::path& manifest);

/// Proportion/fold experiment, results written as JSON lines.
nlohmann::json cmd_experiment(const std::filesystem::path& manifest, const Config& cfg, const std::filesystem::path& out);

/// Sliding-window segmentation of a slide; writes the label-map and overlay PNGs.
nlohmann::json cmd_segment(const std::filesystem::path& slide, const std::filesystem::path& model, const Config& cfg,
                           const std::filesystem::path& labels_out, const std::filesystem::path& overlay_out);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdbl
