// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// PDBM model container.
//
//   "PDBM" | version u16 LE | header_len u32 LE | header (UTF-8 JSON)
//   mean[p] | stddev[p] | basis[p*d] row-major | weights[d*c] row-major
//
// All matrices are little-endian float64. Header keys: "p", "d", "c",
// "class_names", "lambda", "epsilon", "provenance".

#pragma once

#include <cstdint>
#include <filesystem>

#include "pdbl/broadlearn.hpp"

namespace pdbl {

inline constexpr std::uint16_t kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const PdblModel& model);
PdblModel load_model(const std::filesystem::path& path);

}  // namespace pdbl
