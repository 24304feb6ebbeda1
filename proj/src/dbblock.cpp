// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/dbblock.hpp"

#include <string>

#include "pdbl/error.hpp"

namespace pdbl {

std::vector<double> squeeze_stage(const FeatureMap& f) {
  if (f.height() < 1 || f.width() < 1) throw InvalidArgument("cannot pool a feature map with empty spatial extent");
  const double count = static_cast<double>(f.height()) * f.width();
  std::vector<double> e(f.channels());
  for (int c = 0; c < f.channels(); ++c) {
    double sum = 0.0;
    for (float v : f.plane(c)) sum += v;
    e[c] = sum / count;
  }
  return e;
}

MultiScaleFeature build_z(const StageFeatures& stages) {
  if (stages.empty()) throw InvalidArgument("build_z needs at least one stage");
  MultiScaleFeature z;
  for (const auto& f : stages) {
    const auto e = squeeze_stage(f);
    z.insert(z.end(), e.begin(), e.end());
  }
  return z;
}

PyramidalFeature build_b(const std::vector<MultiScaleFeature>& per_scale) {
  if (per_scale.empty()) throw InvalidArgument("build_b needs at least one scale");
  const std::size_t q = per_scale.front().size();
  PyramidalFeature b;
  b.reserve(q * per_scale.size());
  for (std::size_t i = 0; i < per_scale.size(); ++i) {
    if (per_scale[i].size() != q) {
      throw InvalidArgument("scale " + std::to_string(i) + " has q=" + std::to_string(per_scale[i].size()) +
                            ", expected " + std::to_string(q));
    }
    b.insert(b.end(), per_scale[i].begin(), per_scale[i].end());
  }
  return b;
}

PyramidalFeature pyramidal_feature(const std::vector<StageFeatures>& per_scale) {
  std::vector<MultiScaleFeature> zs;
  zs.reserve(per_scale.size());
  for (const auto& stages : per_scale) zs.push_back(build_z(stages));
  return build_b(zs);
}

PyramidalFeature pyramidal_feature(const Image& patch, const PyramidSpec& spec, const Backbone& backbone) {
  std::vector<MultiScaleFeature> zs;
  for (const auto& level : build_pyramid(patch, spec)) zs.push_back(build_z(backbone.extract(level)));
  return build_b(zs);
}

}  // namespace pdbl
