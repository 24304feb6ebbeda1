// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "binary.hpp"
#include "pdbl/error.hpp"

namespace pdbl {
namespace {

constexpr char kMagic[5] = "PDBM";

template <typename M>
std::span<const double> values(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

void save_model(const std::filesystem::path& path, const PdblModel& model) {
  const auto p = model.input_dim();
  const auto d = model.reduced_dim();
  const auto c = model.classes();
  if (model.normalizer.stddev.size() != p || model.pca.input_dim() != p || model.weights.rows() != d ||
      static_cast<Eigen::Index>(model.class_names.size()) != c) {
    throw InvalidArgument("model components have inconsistent shapes");
  }
  nlohmann::json prov;
  auto pyr = nlohmann::json::array();
  for (const auto& s : model.provenance.pyramid) pyr.push_back({s.width, s.height});
  prov["pyramid"] = pyr;
  prov["backbone"] = model.provenance.backbone;
  prov["stage_channels"] = model.provenance.stage_channels;
  const nlohmann::json header{{"p", p},
                              {"d", d},
                              {"c", c},
                              {"class_names", model.class_names},
                              {"lambda", model.lambda},
                              {"epsilon", model.normalizer.epsilon},
                              {"provenance", prov}};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  detail::put_preamble(out, kMagic, kModelFormatVersion, header.dump());
  detail::put_f64s(out, values(model.normalizer.mean));
  detail::put_f64s(out, values(model.normalizer.stddev));
  detail::put_f64s(out, values(model.pca.basis));  // row-major storage
  detail::put_f64s(out, values(model.weights));
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

PdblModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const auto fail = [&](const std::string& why) { return FormatError("'" + path.string() + "': " + why); };
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw fail("not a PDBM file (bad magic)");
  std::uint16_t version = 0;
  std::uint32_t len = 0;
  if (!detail::get_le(in, version) || !detail::get_le(in, len)) throw fail("truncated preamble");
  if (version != kModelFormatVersion) throw fail("unsupported PDBM version " + std::to_string(version));
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw fail("truncated header");
  const auto header = nlohmann::json::parse(text, nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw fail("header is not a JSON object");

  PdblModel m;
  Eigen::Index p = 0, d = 0, c = 0;
  try {
    p = header.at("p").get<Eigen::Index>();
    d = header.at("d").get<Eigen::Index>();
    c = header.at("c").get<Eigen::Index>();
    m.class_names = header.at("class_names").get<std::vector<std::string>>();
    m.lambda = header.at("lambda").get<double>();
    m.normalizer.epsilon = header.at("epsilon").get<double>();
    const auto& prov = header.at("provenance");
    for (const auto& s : prov.at("pyramid")) m.provenance.pyramid.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    m.provenance.backbone = prov.at("backbone").get<std::string>();
    m.provenance.stage_channels = prov.at("stage_channels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  }
  if (p < 1 || d < 1 || d > p || c < 2 || static_cast<Eigen::Index>(m.class_names.size()) != c) {
    throw fail("inconsistent dimensions in header");
  }
  m.normalizer.mean.resize(p);
  m.normalizer.stddev.resize(p);
  m.pca.basis.resize(p, d);
  m.weights.resize(d, c);
  if (!detail::get_f64s(in, {m.normalizer.mean.data(), static_cast<std::size_t>(p)}) ||
      !detail::get_f64s(in, {m.normalizer.stddev.data(), static_cast<std::size_t>(p)}) ||
      !detail::get_f64s(in, {m.pca.basis.data(), static_cast<std::size_t>(p * d)}) ||
      !detail::get_f64s(in, {m.weights.data(), static_cast<std::size_t>(d * c)})) {
    throw fail("truncated matrix data");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw fail("trailing bytes after weights");
  return m;
}

}  // namespace pdbl
