// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pdbl {

struct Sample {
  std::string id;
  std::filesystem::path path;
  std::string label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Labelled patch list. Class names are the sorted distinct labels.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Sample> samples);

  /// CSV with header `sample_id,path,label`. Relative paths resolve against the manifest's directory.
  static Dataset from_manifest(const std::filesystem::path& manifest);

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int class_index(const std::string& label) const;

  /// Subset in the given index order.
  Dataset subset(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<Sample> samples_;
  std::vector<std::string> class_names_;
};

void write_manifest(const std::filesystem::path& manifest, const Dataset& ds);

struct SplitSpec {
  double proportion = 1.0;  // fraction used for training, in (0, 1]
  std::uint64_t seed = 0;
  bool stratified = true;
  int repeats = 1;
};

/// Indices into the dataset, ascending.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  friend bool operator==(const Fold&, const Fold&) = default;
};

/// Seeded random train/test partitions, one per repeat. Stratified splits
/// take ceil(proportion * class size) samples of every class for training;
/// otherwise ceil(proportion * n) samples overall. The rest is the test pool.
std::vector<Fold> split(const Dataset& ds, const SplitSpec& spec);

}  // namespace pdbl
