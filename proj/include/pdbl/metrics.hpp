// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdbl {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;  // true count
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::int64_t total = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  /// confusion[true][predicted]
  std::vector<std::vector<std::int64_t>> confusion;
};

/// Accuracy, per-class precision/recall/F1 and macro-F1 over every declared class.
/// Undefined ratios (0/0) are reported as 0; an empty label list yields all-zero metrics.
EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth,
                    std::span<const std::string> class_names);

/// Label-string form; every label must be one of `class_names`.
EvalReport evaluate(std::span<const std::string> predicted, std::span<const std::string> truth,
                    std::span<const std::string> class_names);

struct FoldStatistics {
  int folds = 0;
  double accuracy_mean = 0.0;
  double accuracy_sd = 0.0;  // population
  double macro_f1_mean = 0.0;
  double macro_f1_sd = 0.0;
};

FoldStatistics summarize(std::span<const EvalReport> folds);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const FoldStatistics& s);

}  // namespace pdbl
