// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/feature_io.hpp"

#include <cmath>
#include <cstring>
#include <set>

#include "binary.hpp"
#include "pdbl/error.hpp"

namespace pdbl {
namespace {

constexpr char kMagic[5] = "PDBF";
constexpr std::uint32_t kMaxHeaderBytes = 1u << 30;

std::string describe(const std::string& id, std::size_t index) {
  return "sample '" + id + "' (#" + std::to_string(index) + ")";
}

nlohmann::json header_to_json(const FeatureHeader& h) {
  nlohmann::json j;
  j["sample_ids"] = h.sample_ids;
  if (h.labels) j["labels"] = *h.labels;
  j["scale_count"] = h.scale_count();
  j["stage_count"] = h.stage_count();
  auto pyr = nlohmann::json::array();
  for (const auto& s : h.pyramid) pyr.push_back({s.width, s.height});
  j["pyramid"] = pyr;
  j["shapes"] = h.shapes;
  j["metadata"] = h.metadata;
  return j;
}

void check_header(const FeatureHeader& h, const std::filesystem::path& path) {
  const auto where = [&] { return "'" + path.string() + "': "; };
  if (h.shapes.empty()) throw FormatError(where() + "no scales declared");
  const std::size_t stages = h.shapes.front().size();
  if (stages == 0) throw FormatError(where() + "no stages declared");
  for (std::size_t s = 0; s < h.shapes.size(); ++s) {
    if (h.shapes[s].size() != stages) throw FormatError(where() + "scale " + std::to_string(s) + " has a different stage count");
    for (std::size_t k = 0; k < stages; ++k) {
      const auto& sh = h.shapes[s][k];
      if (sh[0] < 1 || sh[1] < 0 || sh[2] < 0) throw FormatError(where() + "invalid stage shape");
      if (sh[0] != h.shapes[0][k][0]) {
        throw FormatError(where() + "stage " + std::to_string(k) + " channel count differs across scales");
      }
    }
  }
  if (!h.pyramid.empty() && h.pyramid.size() != h.shapes.size()) {
    throw FormatError(where() + "pyramid entry count does not match scale count");
  }
  if (h.labels && h.labels->size() != h.sample_ids.size()) {
    throw FormatError(where() + "label count does not match sample count");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < h.sample_ids.size(); ++i) {
    if (!seen.insert(h.sample_ids[i]).second) {
      throw FormatError(where() + "duplicate " + describe(h.sample_ids[i], i));
    }
  }
}

FeatureHeader header_from_json(const nlohmann::json& j, const std::filesystem::path& path) {
  FeatureHeader h;
  try {
    h.sample_ids = j.at("sample_ids").get<std::vector<std::string>>();
    if (j.contains("labels") && !j["labels"].is_null()) h.labels = j["labels"].get<std::vector<std::string>>();
    for (const auto& s : j.at("pyramid")) h.pyramid.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    h.shapes = j.at("shapes").get<std::vector<std::vector<StageShape>>>();
    if (j.contains("metadata")) h.metadata = j["metadata"];
    if (j.at("scale_count").get<std::size_t>() != h.scale_count() ||
        j.at("stage_count").get<std::size_t>() != h.stage_count()) {
      throw FormatError("'" + path.string() + "': declared scale/stage counts disagree with shape table");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "': malformed header: " + e.what());
  }
  check_header(h, path);
  return h;
}

}  // namespace

std::vector<int> FeatureHeader::stage_channels() const {
  std::vector<int> out;
  if (!shapes.empty()) {
    for (const auto& sh : shapes.front()) out.push_back(sh[0]);
  }
  return out;
}

std::vector<std::vector<StageShape>> shapes_of(const std::vector<StageFeatures>& scales) {
  std::vector<std::vector<StageShape>> out;
  for (const auto& stages : scales) {
    auto& row = out.emplace_back();
    for (const auto& f : stages) row.push_back({f.channels(), f.height(), f.width()});
  }
  return out;
}

FeatureWriter::FeatureWriter(const std::filesystem::path& path, FeatureHeader header)
    : path_(path), header_(std::move(header)) {
  check_header(header_, path_);
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + path_.string() + "' for writing");
  detail::put_preamble(out_, kMagic, kFeatureFormatVersion, header_to_json(header_).dump());
}

void FeatureWriter::write(const FeatureSample& sample) {
  const std::size_t i = written_;
  if (i >= header_.sample_ids.size()) {
    throw InvalidArgument("'" + path_.string() + "': more samples written than declared");
  }
  if (sample.id != header_.sample_ids[i]) {
    throw InvalidArgument("'" + path_.string() + "': expected " + describe(header_.sample_ids[i], i) +
                          ", got '" + sample.id + "'");
  }
  if (shapes_of(sample.scales) != header_.shapes) {
    throw FormatError("'" + path_.string() + "': inconsistent shapes for " + describe(sample.id, i));
  }
  for (const auto& stages : sample.scales) {
    for (const auto& f : stages) {
      for (float v : f.data()) {
        if (!std::isfinite(v)) throw FormatError("'" + path_.string() + "': non-finite value in " + describe(sample.id, i));
      }
      detail::put_f32s(out_, f.data());
    }
  }
  if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  ++written_;
}

void FeatureWriter::finish() {
  if (written_ != header_.sample_ids.size()) {
    throw InvalidArgument("'" + path_.string() + "': " + std::to_string(written_) + " of " +
                          std::to_string(header_.sample_ids.size()) + " samples written");
  }
  out_.close();
  if (!out_) throw IoError("close failed for '" + path_.string() + "'");
}

FeatureReader::FeatureReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open '" + path.string() + "'");
  char magic[4];
  if (!in_.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("'" + path.string() + "' is not a PDBF file (bad magic)");
  }
  std::uint16_t version = 0;
  std::uint32_t len = 0;
  if (!detail::get_le(in_, version) || !detail::get_le(in_, len)) throw FormatError("'" + path.string() + "': truncated preamble");
  if (version != kFeatureFormatVersion) {
    throw FormatError("'" + path.string() + "': unsupported PDBF version " + std::to_string(version));
  }
  if (len > kMaxHeaderBytes) throw FormatError("'" + path.string() + "': header length out of range");
  std::string text(len, '\0');
  if (!in_.read(text.data(), len)) throw FormatError("'" + path.string() + "': truncated header");
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("'" + path.string() + "': header is not a JSON object");
  header_ = header_from_json(j, path);
}

std::optional<FeatureSample> FeatureReader::next() {
  const std::size_t i = read_;
  if (i >= header_.sample_ids.size()) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw FormatError("'" + path_.string() + "': trailing bytes after last sample");
    }
    return std::nullopt;
  }
  FeatureSample s;
  s.id = header_.sample_ids[i];
  if (header_.labels) s.label = (*header_.labels)[i];
  for (const auto& scale_shapes : header_.shapes) {
    auto& stages = s.scales.emplace_back();
    for (const auto& sh : scale_shapes) {
      FeatureMap f(sh[0], sh[1], sh[2]);
      if (!detail::get_f32s(in_, f.data())) {
        throw FormatError("'" + path_.string() + "': truncated file at " + describe(s.id, i));
      }
      for (float v : f.data()) {
        if (!std::isfinite(v)) throw FormatError("'" + path_.string() + "': non-finite value in " + describe(s.id, i));
      }
      stages.push_back(std::move(f));
    }
  }
  ++read_;
  return s;
}

void write_features(const std::filesystem::path& path, const std::vector<FeatureSample>& samples,
                    const std::vector<Size>& pyramid, const nlohmann::json& metadata) {
  if (samples.empty()) throw InvalidArgument("cannot write a feature file with no samples");
  FeatureHeader h;
  h.pyramid = pyramid;
  h.metadata = metadata;
  h.shapes = shapes_of(samples.front().scales);
  const bool labelled = samples.front().label.has_value();
  if (labelled) h.labels.emplace();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.label.has_value() != labelled) {
      throw InvalidArgument("labels must be present on all samples or none; see " + describe(s.id, i));
    }
    if (shapes_of(s.scales) != h.shapes) {
      throw FormatError("inconsistent shapes for " + describe(s.id, i));
    }
    h.sample_ids.push_back(s.id);
    if (labelled) h.labels->push_back(*s.label);
  }
  FeatureWriter w(path, std::move(h));
  for (const auto& s : samples) w.write(s);
  w.finish();
}

FeatureFile read_features(const std::filesystem::path& path) {
  FeatureReader r(path);
  FeatureFile f{r.header(), {}};
  while (auto s = r.next()) f.samples.push_back(std::move(*s));
  return f;
}

void validate_pyramid(const FeatureHeader& header, const PyramidSpec& spec) {
  if (header.scale_count() != spec.count()) {
    throw FormatError("feature file has " + std::to_string(header.scale_count()) + " scales but the pyramid has " +
                      std::to_string(spec.count()));
  }
  if (!header.pyramid.empty() && header.pyramid != spec.scales()) {
    throw FormatError("feature file pyramid resolutions differ from the configured pyramid");
  }
}

}  // namespace pdbl
