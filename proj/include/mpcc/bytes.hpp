// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace mpcc {

// All on-disk and on-wire integers are little-endian.

inline void store_u32_le(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline void store_u64_le(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint32_t load_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t load_u64_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline void store_f64_le(std::uint8_t* p, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  store_u64_le(p, bits);
}

inline double load_f64_le(const std::uint8_t* p) {
  std::uint64_t bits = load_u64_le(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

// Append helpers for building binary buffers.
inline void put_u8(std::vector<std::uint8_t>& b, std::uint8_t v) { b.push_back(v); }
inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  std::uint8_t tmp[4];
  store_u32_le(tmp, v);
  b.insert(b.end(), tmp, tmp + 4);
}
inline void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  std::uint8_t tmp[8];
  store_u64_le(tmp, v);
  b.insert(b.end(), tmp, tmp + 8);
}
inline void put_f64(std::vector<std::uint8_t>& b, double v) {
  std::uint8_t tmp[8];
  store_f64_le(tmp, v);
  b.insert(b.end(), tmp, tmp + 8);
}

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320), as used by zlib.
std::uint32_t crc32(const std::uint8_t* data, std::size_t n, std::uint32_t seed = 0);
inline std::uint32_t crc32(const std::vector<std::uint8_t>& v, std::uint32_t seed = 0) {
  return crc32(v.data(), v.size(), seed);
}

std::string to_hex(const std::uint8_t* data, std::size_t n);
std::vector<std::uint8_t> from_hex(const std::string& hex);  // throws ParseError

}  // namespace mpcc
