// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "pdbl/error.hpp"

namespace pdbl {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, bound) by rejection; independent of <random> distributions.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do r = rng();
  while (r >= limit);
  return r % bound;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(rng, i)]);
}

std::size_t train_count(double proportion, std::size_t n) {
  // Guard against 0.1 * 50 = 5.000000000000001 style round-up.
  const double exact = proportion * static_cast<double>(n);
  const double rounded = std::round(exact);
  const double k = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(n, static_cast<std::size_t>(k));
}

}  // namespace

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
  std::set<std::string> ids, labels;
  for (const auto& s : samples_) {
    if (s.id.empty()) throw InvalidArgument("sample id must not be empty");
    if (s.label.empty()) throw InvalidArgument("sample '" + s.id + "' has an empty label");
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate sample id '" + s.id + "'");
    labels.insert(s.label);
  }
  class_names_.assign(labels.begin(), labels.end());
}

Dataset Dataset::from_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest '" + manifest.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest '" + manifest.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != std::vector<std::string>{"sample_id", "path", "label"}) {
    throw FormatError("manifest '" + manifest.string() + "' must start with header 'sample_id,path,label'");
  }
  const auto base = manifest.parent_path();
  std::vector<Sample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw FormatError("manifest '" + manifest.string() + "' line " + std::to_string(line_no) + ": expected 3 fields");
    }
    std::filesystem::path p(f[1]);
    if (p.is_relative()) p = base / p;
    samples.push_back({f[0], p, f[2]});
  }
  return Dataset(std::move(samples));
}

int Dataset::class_index(const std::string& label) const {
  const auto it = std::lower_bound(class_names_.begin(), class_names_.end(), label);
  if (it == class_names_.end() || *it != label) throw InvalidArgument("unknown class '" + label + "'");
  return static_cast<int>(it - class_names_.begin());
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples_.at(i));
  return Dataset(std::move(out));
}

void write_manifest(const std::filesystem::path& manifest, const Dataset& ds) {
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + manifest.string() + "'");
  out << "sample_id,path,label\n";
  for (const auto& s : ds.samples()) {
    out << csv_field(s.id) << ',' << csv_field(s.path.string()) << ',' << csv_field(s.label) << '\n';
  }
  if (!out) throw IoError("write failed for manifest '" + manifest.string() + "'");
}

std::vector<Fold> split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.proportion > 0.0 && spec.proportion <= 1.0)) throw InvalidArgument("split proportion must be in (0, 1]");
  if (spec.repeats < 1) throw InvalidArgument("split repeats must be >= 1");
  if (ds.size() == 0) throw InvalidArgument("cannot split an empty dataset");
  const std::size_t classes = ds.class_names().size();
  if (spec.stratified && spec.proportion * static_cast<double>(ds.size()) < static_cast<double>(classes)) {
    throw InvalidArgument("proportion leaves fewer training samples than classes");
  }

  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.class_index(ds.samples()[i].label)].push_back(i);

  std::vector<Fold> folds;
  for (int f = 0; f < spec.repeats; ++f) {
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(f) + 1)));
    std::vector<bool> in_train(ds.size(), false);
    if (spec.stratified) {
      for (auto members : by_class) {
        shuffle(members, rng);
        const auto k = train_count(spec.proportion, members.size());
        for (std::size_t j = 0; j < k; ++j) in_train[members[j]] = true;
      }
    } else {
      std::vector<std::size_t> all(ds.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      shuffle(all, rng);
      const auto k = train_count(spec.proportion, all.size());
      for (std::size_t j = 0; j < k; ++j) in_train[all[j]] = true;
    }
    Fold fold;
    for (std::size_t i = 0; i < ds.size(); ++i) (in_train[i] ? fold.train : fold.test).push_back(i);
    for (std::size_t k = 0; k < classes; ++k) {
      const bool present = std::any_of(by_class[k].begin(), by_class[k].end(), [&](auto i) { return in_train[i]; });
      if (!present) {
        throw InvalidArgument("class '" + ds.class_names()[k] + "' has no training sample in fold " + std::to_string(f));
      }
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace pdbl
