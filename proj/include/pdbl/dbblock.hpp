// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "pdbl/backbone.hpp"
#include "pdbl/image.hpp"
#include "pdbl/pyramid.hpp"

namespace pdbl {

/// Stage vectors of one image concatenated: length q = sum of stage channels.
using MultiScaleFeature = std::vector<double>;
/// Per-scale z vectors concatenated in pyramid order: length p = s * q.
using PyramidalFeature = std::vector<double>;

/// Global average pool: element c is the mean of channel c over H×W.
std::vector<double> squeeze_stage(const FeatureMap& f);

MultiScaleFeature build_z(const StageFeatures& stages);

PyramidalFeature build_b(const std::vector<MultiScaleFeature>& per_scale);

/// Squeeze-and-concatenate for features that were extracted elsewhere (one StageFeatures per scale).
PyramidalFeature pyramidal_feature(const std::vector<StageFeatures>& per_scale);

/// Full front end for one patch: pyramid, the same backbone on every level, DB-block.
PyramidalFeature pyramidal_feature(const Image& patch, const PyramidSpec& spec, const Backbone& backbone);

}  // namespace pdbl
