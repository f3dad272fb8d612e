// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/keyschedule.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>

#include "mpcc/bytes.hpp"
#include "mpcc/errors.hpp"

namespace mpcc {

namespace detail {

namespace {

inline std::uint32_t rotr32(std::uint32_t v, int n) { return (v >> n) | (v << (32 - n)); }

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

void sha256_compress(std::uint32_t h[8], const std::uint8_t block[64]) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i)
    w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
           (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
  for (int i = 16; i < 64; ++i) {
    std::uint32_t s0 = rotr32(w[i - 15], 7) ^ rotr32(w[i - 15], 18) ^ (w[i - 15] >> 3);
    std::uint32_t s1 = rotr32(w[i - 2], 17) ^ rotr32(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
  std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
  for (int i = 0; i < 64; ++i) {
    std::uint32_t s1 = rotr32(e, 6) ^ rotr32(e, 11) ^ rotr32(e, 25);
    std::uint32_t ch = (e & f) ^ (~e & g);
    std::uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
    std::uint32_t s0 = rotr32(a, 2) ^ rotr32(a, 13) ^ rotr32(a, 22);
    std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    std::uint32_t t2 = s0 + maj;
    hh = g;
    g = f;
    f = e;
    e = d + t1;
    d = c;
    c = b;
    b = a;
    a = t1 + t2;
  }
  h[0] += a;
  h[1] += b;
  h[2] += c;
  h[3] += d;
  h[4] += e;
  h[5] += f;
  h[6] += g;
  h[7] += hh;
}

}  // namespace

std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t n) {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::size_t full = n / 64;
  for (std::size_t i = 0; i < full; ++i) sha256_compress(h, data + 64 * i);

  std::uint8_t tail[128] = {0};
  std::size_t rem = n - 64 * full;
  std::memcpy(tail, data + 64 * full, rem);
  tail[rem] = 0x80;
  std::size_t tail_len = (rem + 9 <= 64) ? 64 : 128;
  std::uint64_t bit_len = std::uint64_t(n) * 8;
  for (int i = 0; i < 8; ++i)
    tail[tail_len - 1 - i] = static_cast<std::uint8_t>(bit_len >> (8 * i));
  sha256_compress(h, tail);
  if (tail_len == 128) sha256_compress(h, tail + 64);

  std::array<std::uint8_t, 32> out;
  for (int i = 0; i < 8; ++i) {
    out[4 * i] = static_cast<std::uint8_t>(h[i] >> 24);
    out[4 * i + 1] = static_cast<std::uint8_t>(h[i] >> 16);
    out[4 * i + 2] = static_cast<std::uint8_t>(h[i] >> 8);
    out[4 * i + 3] = static_cast<std::uint8_t>(h[i]);
  }
  return out;
}

std::array<std::uint8_t, 32> hmac_sha256(const std::uint8_t* key, std::size_t key_len,
                                         const std::uint8_t* msg, std::size_t msg_len) {
  std::uint8_t k[64] = {0};
  if (key_len > 64) {
    auto digest = sha256(key, key_len);
    std::memcpy(k, digest.data(), 32);
  } else {
    std::memcpy(k, key, key_len);
  }
  std::vector<std::uint8_t> inner(64 + msg_len);
  for (int i = 0; i < 64; ++i) inner[i] = k[i] ^ 0x36;
  std::memcpy(inner.data() + 64, msg, msg_len);
  auto inner_digest = sha256(inner.data(), inner.size());

  std::uint8_t outer[96];
  for (int i = 0; i < 64; ++i) outer[i] = k[i] ^ 0x5c;
  std::memcpy(outer + 64, inner_digest.data(), 32);
  return sha256(outer, 96);
}

}  // namespace detail

SubKeys derive_subkeys(const MasterKey& master) {
  SubKeys keys;
  const char* mask_label = "mask";
  const char* perm_label = "perm";
  auto r = detail::hmac_sha256(master.secret.data(), master.secret.size(),
                               reinterpret_cast<const std::uint8_t*>(mask_label), 4);
  auto p = detail::hmac_sha256(master.secret.data(), master.secret.size(),
                               reinterpret_cast<const std::uint8_t*>(perm_label), 4);
  std::memcpy(keys.k_r.data(), r.data(), 32);
  std::memcpy(keys.k_p.data(), p.data(), 32);
  return keys;
}

BlockKeystream::BlockKeystream(const Key256& key, std::uint64_t block_index) {
  static constexpr std::uint32_t kSigma[4] = {0x61707865, 0x3320646e, 0x79622d32, 0x6b206574};
  for (int i = 0; i < 4; ++i) state_[i] = kSigma[i];
  for (int i = 0; i < 8; ++i) state_[4 + i] = load_u32_le(key.data() + 4 * i);
  state_[12] = 0;  // 64-bit block counter, low word
  state_[13] = 0;
  state_[14] = static_cast<std::uint32_t>(block_index);
  state_[15] = static_cast<std::uint32_t>(block_index >> 32);
}

void BlockKeystream::refill() {
  auto quarter = [](std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    auto rotl = [](std::uint32_t v, int n) { return (v << n) | (v >> (32 - n)); };
    a += b;
    d = rotl(d ^ a, 16);
    c += d;
    b = rotl(b ^ c, 12);
    a += b;
    d = rotl(d ^ a, 8);
    c += d;
    b = rotl(b ^ c, 7);
  };

  std::array<std::uint32_t, 16> x = state_;
  for (int round = 0; round < 10; ++round) {
    quarter(x[0], x[4], x[8], x[12]);
    quarter(x[1], x[5], x[9], x[13]);
    quarter(x[2], x[6], x[10], x[14]);
    quarter(x[3], x[7], x[11], x[15]);
    quarter(x[0], x[5], x[10], x[15]);
    quarter(x[1], x[6], x[11], x[12]);
    quarter(x[2], x[7], x[8], x[13]);
    quarter(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) store_u32_le(block_.data() + 4 * i, x[i] + state_[i]);

  // advance the 64-bit counter
  if (++state_[12] == 0) ++state_[13];
}

void BlockKeystream::next_bytes(std::uint8_t* out, std::size_t n) {
  while (n > 0) {
    std::size_t in_block = static_cast<std::size_t>(cursor_ % 64);
    if (in_block == 0) refill();
    std::size_t take = std::min<std::size_t>(64 - in_block, n);
    std::memcpy(out, block_.data() + in_block, take);
    out += take;
    n -= take;
    cursor_ += take;
  }
}

std::vector<std::uint8_t> BlockKeystream::next_bytes(std::size_t n) {
  std::vector<std::uint8_t> out(n);
  if (n > 0) next_bytes(out.data(), n);
  return out;
}

std::uint32_t BlockKeystream::next_u32() {
  std::uint8_t buf[4];
  next_bytes(buf, 4);
  return load_u32_le(buf);
}

std::uint32_t BlockKeystream::uniform_below(std::uint32_t bound) {
  if (bound == 0) throw BadArgs("uniform_below: bound must be positive");
  if (bound == 1) return 0;
  // rejection threshold: largest multiple of bound that fits in 32 bits
  const std::uint64_t limit = (0x100000000ull / bound) * bound;
  for (;;) {
    std::uint32_t u = next_u32();
    if (u < limit) return u % bound;
  }
}

std::vector<std::uint8_t> keystream_bytes(const Key256& key, std::uint64_t block_index,
                                          std::size_t n) {
  BlockKeystream stream(key, block_index);
  return stream.next_bytes(n);
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.map.resize(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) inv.map[map[k]] = static_cast<std::uint32_t>(k);
  return inv;
}

Permutation gen_permutation(const Key256& k_p, std::uint64_t block_index, std::size_t n) {
  if (n < 1) throw BadArgs("gen_permutation: n must be >= 1");
  Permutation perm;
  perm.map.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm.map[i] = static_cast<std::uint32_t>(i);
  BlockKeystream stream(k_p, block_index);
  for (std::size_t i = n - 1; i >= 1; --i) {
    std::uint32_t j = stream.uniform_below(static_cast<std::uint32_t>(i + 1));
    std::swap(perm.map[i], perm.map[j]);
  }
  return perm;
}

MaskVector gen_mask(const Key256& k_r, std::uint64_t block_index, std::size_t n, int t) {
  if (n < 1) throw BadArgs("gen_mask: n must be >= 1");
  if (t < 1) throw BadArgs("gen_mask: t must be >= 1");
  MaskVector mask;
  mask.levels.resize(n);
  BlockKeystream stream(k_r, block_index);
  const std::uint32_t two_t = 2 * static_cast<std::uint32_t>(t);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t v = stream.uniform_below(two_t);
    std::int32_t magnitude = static_cast<std::int32_t>(v / 2) + 1;
    mask.levels[i] = (v % 2 == 0) ? magnitude : -magnitude;
  }
  return mask;
}

MasterKey master_key_from_hex(const std::string& hex) {
  std::string trimmed;
  for (char c : hex)
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
  if (trimmed.size() != 64)
    throw KeyError("master key must be 64 hex characters, got " +
                   std::to_string(trimmed.size()));
  std::vector<std::uint8_t> raw;
  try {
    raw = from_hex(trimmed);
  } catch (const ParseError& e) {
    throw KeyError(std::string("master key: ") + e.what());
  }
  MasterKey key;
  std::memcpy(key.secret.data(), raw.data(), 32);
  return key;
}

MasterKey load_master_key_file(const std::string& path) {
  struct stat st;
  if (::stat(path.c_str(), &st) == 0) {
    if (st.st_mode & (S_IROTH | S_IWOTH | S_IRGRP | S_IWGRP))
      std::fprintf(stderr, "warning: key file %s is readable by other users\n", path.c_str());
  }
  std::ifstream in(path);
  if (!in) throw KeyError("cannot open key file: " + path);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return master_key_from_hex(contents);
}

MasterKey load_master_key_env(const char* var) {
  const char* value = std::getenv(var);
  if (!value) throw KeyError(std::string("environment variable not set: ") + var);
  return master_key_from_hex(value);
}

void save_master_key_file(const MasterKey& key, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw KeyError("cannot write key file: " + path);
  out << master_key_hex(key) << "\n";
  out.close();
  ::chmod(path.c_str(), S_IRUSR | S_IWUSR);
}

MasterKey random_master_key() {
  std::random_device rd;
  MasterKey key;
  for (std::size_t i = 0; i < key.secret.size(); i += 4) {
    std::uint32_t word = rd();
    store_u32_le(key.secret.data() + i, word);
  }
  return key;
}

std::string master_key_hex(const MasterKey& key) {
  return to_hex(key.secret.data(), key.secret.size());
}

}  // namespace mpcc
