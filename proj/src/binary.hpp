// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian primitives shared by the PDBF and PDBM containers.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pdbl::detail {

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf.data(), buf.size());
}

template <typename U>
bool get_le(std::istream& is, U& v) {
  std::array<unsigned char, sizeof(U)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return true;
}

inline void put_f32s(std::ostream& os, std::span<const float> xs) {
  std::vector<char> buf(xs.size() * 4);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(xs[i]);
    for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline bool get_f32s(std::istream& is, std::span<float> xs) {
  std::vector<unsigned char> buf(xs.size() * 4);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) return false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(buf[i * 4 + b]) << (8 * b);
    xs[i] = std::bit_cast<float>(u);
  }
  return true;
}

inline void put_f64s(std::ostream& os, std::span<const double> xs) {
  for (double x : xs) put_le(os, std::bit_cast<std::uint64_t>(x));
}

inline bool get_f64s(std::istream& is, std::span<double> xs) {
  for (auto& x : xs) {
    std::uint64_t u = 0;
    if (!get_le(is, u)) return false;
    x = std::bit_cast<double>(u);
  }
  return true;
}

/// magic[4] | version u16 | header_len u32 | header JSON bytes.
inline void put_preamble(std::ostream& os, const char (&magic)[5], std::uint16_t version, const std::string& header) {
  os.write(magic, 4);
  put_le<std::uint16_t>(os, version);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
}

}  // namespace pdbl::detail
