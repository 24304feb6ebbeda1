// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "pdbl/config.hpp"
#include "pdbl/error.hpp"
#include "support.hpp"

using namespace pdbl;

TEST_CASE("defaults") {
  const Config c = make_config({});
  CHECK(c.seed == 0);
  CHECK(c.threads == 1);
  CHECK(c.pyramid == PyramidSpec::standard());
  CHECK(c.backbone_kind == "toy");
  CHECK(c.stage_channels == std::vector<int>{8, 16, 32, 64});
  CHECK(c.fit.lambda == 1e-8);
  CHECK_FALSE(c.fit.dimension);
  CHECK(c.proportions == std::vector<double>{0.5});
  CHECK(c.stratified);
  CHECK(c.repeats == 1);
  CHECK(c.window == 224);
  CHECK(c.step == 104);
  CHECK(c.alpha == 0.5);
}

TEST_CASE("file values and overrides") {
  const auto values = parse_config_text(
      "seed = 7\n"
      "threads = 2\n"
      "[pyramid]\n"
      "scales = 64x64, 32x32\n"
      "[backbone]\n"
      "stage_channels = 4,8\n"
      "[model]\n"
      "lambda = 0.001\n"
      "d = 12\n"
      "[split]\n"
      "proportions = 0.1,0.5\n"
      "stratified = false\n"
      "repeats = 5\n"
      "[segment]\n"
      "window = 64\n"
      "step = 16\n"
      "alpha = 0.25\n");
  const Config c = make_config(values);
  CHECK(c.seed == 7);
  CHECK(c.threads == 2);
  CHECK(c.pyramid.scales() == std::vector<Size>{{64, 64}, {32, 32}});
  CHECK(c.stage_channels == std::vector<int>{4, 8});
  CHECK(c.fit.lambda == 0.001);
  CHECK(c.fit.dimension == 12);
  CHECK(c.proportions == std::vector<double>{0.1, 0.5});
  CHECK_FALSE(c.stratified);
  CHECK(c.repeats == 5);
  CHECK(c.window == 64);
  CHECK(c.step == 16);
  CHECK(c.alpha == 0.25);
  CHECK(c.toy().seed == 7);

  const Config o = make_config(values, {{"seed", "9"}, {"model.d", "auto"}});
  CHECK(o.seed == 9);
  CHECK_FALSE(o.fit.dimension);
}

TEST_CASE("every violation is reported") {
  const ConfigValues bad = {{"seed", "-3x"},
                            {"threads", "0"},
                            {"pyramid.scales", "10x10,20x20"},
                            {"model.lambda", "0"},
                            {"model.colour", "blue"},
                            {"split.proportions", "1.5"},
                            {"segment.alpha", "2"},
                            {"backbone.kind", "pdbf"}};
  try {
    make_config(bad);
    FAIL("invalid configuration accepted");
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    for (const char* key : {"seed", "threads", "pyramid.scales", "model.lambda", "model.colour", "split.proportions",
                            "segment.alpha", "backbone.features"}) {
      const bool found = std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(std::string(key) + ":", 0) == 0; });
      CHECK_MESSAGE(found, key);
    }
    CHECK(v.size() == 8);
  }
}

TEST_CASE("syntax errors and missing files") {
  CHECK_THROWS_AS(parse_config_text("[model\nlambda=1\n"), ConfigError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/pdbl.ini"), IoError);
  testing::TempDir dir("cfg");
  testing::spit(dir / "c.ini", "[model]\nlambda = 2\n");
  CHECK(make_config(read_config_file(dir / "c.ini")).fit.lambda == 2.0);
}
