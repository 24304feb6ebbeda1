// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pdbl/error.hpp"

namespace pdbl {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw InvalidArgument("'" + s + "' is not a valid number");
  return v;
}

bool parse_bool(const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidArgument("'" + s + "' is not a boolean");
}

}  // namespace

ConfigValues parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({std::string("syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  ConfigValues out;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      out[key] = trim(node.data());
    } else {
      for (const auto& [sub, leaf] : node) out[key + "." + sub] = trim(leaf.data());
    }
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

Config make_config(const ConfigValues& values, const ConfigValues& overrides) {
  ConfigValues merged = values;
  for (const auto& [k, v] : overrides) merged[k] = v;

  Config cfg;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"seed", [&](const std::string& v) { cfg.seed = parse_number<std::uint64_t>(v); }},
      {"threads",
       [&](const std::string& v) {
         cfg.threads = parse_number<int>(v);
         if (cfg.threads < 1) throw InvalidArgument("must be >= 1");
       }},
      {"pyramid.scales",
       [&](const std::string& v) {
         std::vector<Size> scales;
         for (const auto& s : split_list(v)) scales.push_back(parse_size(s));
         cfg.pyramid = PyramidSpec(std::move(scales));
       }},
      {"backbone.kind",
       [&](const std::string& v) {
         if (v != "toy" && v != "pdbf") throw InvalidArgument("must be 'toy' or 'pdbf'");
         cfg.backbone_kind = v;
       }},
      {"backbone.stage_channels",
       [&](const std::string& v) {
         std::vector<int> ch;
         for (const auto& s : split_list(v)) {
           ch.push_back(parse_number<int>(s));
           if (ch.back() < 1) throw InvalidArgument("channel counts must be >= 1");
         }
         if (ch.empty()) throw InvalidArgument("needs at least one stage");
         cfg.stage_channels = std::move(ch);
       }},
      {"backbone.features", [&](const std::string& v) { cfg.features = std::filesystem::path(v); }},
      {"model.lambda",
       [&](const std::string& v) {
         cfg.fit.lambda = parse_number<double>(v);
         if (!(cfg.fit.lambda > 0.0)) throw InvalidArgument("must be > 0");
       }},
      {"model.d",
       [&](const std::string& v) {
         if (trim(v) == "auto") {
           cfg.fit.dimension.reset();
           return;
         }
         cfg.fit.dimension = parse_number<int>(v);
         if (*cfg.fit.dimension < 1) throw InvalidArgument("must be >= 1 or 'auto'");
       }},
      {"model.epsilon",
       [&](const std::string& v) {
         cfg.fit.epsilon = parse_number<double>(v);
         if (!(cfg.fit.epsilon > 0.0)) throw InvalidArgument("must be > 0");
       }},
      {"split.proportions",
       [&](const std::string& v) {
         std::vector<double> ps;
         for (const auto& s : split_list(v)) {
           ps.push_back(parse_number<double>(s));
           if (!(ps.back() > 0.0 && ps.back() <= 1.0)) throw InvalidArgument("proportions must be in (0, 1]");
         }
         if (ps.empty()) throw InvalidArgument("needs at least one proportion");
         cfg.proportions = std::move(ps);
       }},
      {"split.stratified", [&](const std::string& v) { cfg.stratified = parse_bool(v); }},
      {"split.repeats",
       [&](const std::string& v) {
         cfg.repeats = parse_number<int>(v);
         if (cfg.repeats < 1) throw InvalidArgument("must be >= 1");
       }},
      {"segment.window",
       [&](const std::string& v) {
         cfg.window = parse_number<int>(v);
         if (cfg.window < 1) throw InvalidArgument("must be >= 1");
       }},
      {"segment.step",
       [&](const std::string& v) {
         cfg.step = parse_number<int>(v);
         if (cfg.step < 1) throw InvalidArgument("must be >= 1");
       }},
      {"segment.alpha",
       [&](const std::string& v) {
         cfg.alpha = parse_number<double>(v);
         if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("must be in [0, 1]");
       }},
  };

  std::vector<std::string> violations;
  for (const auto& [key, value] : merged) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      violations.push_back(key + ": unknown key");
      continue;
    }
    try {
      it->second(value);
    } catch (const std::exception& e) {
      violations.push_back(key + ": " + e.what());
    }
  }
  if (cfg.backbone_kind == "pdbf" && !cfg.features) violations.push_back("backbone.features: required when backbone.kind = pdbf");
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return cfg;
}

}  // namespace pdbl
