// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Key schedule: a master secret is expanded into two 256-bit class keys,
//   k_r ("statistical" key, drives per-block mask vectors)
//   k_p ("permutation" key, drives per-block permutations)
// and each class key is expanded per data block into a deterministic byte
// stream. Everything here is a pure function of (key, block index), so the
// encoder and the decoders regenerate identical masks and permutations
// without ever transmitting them.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mpcc {

using Key256 = std::array<std::uint8_t, 32>;

struct MasterKey {
  Key256 secret{};
};

struct SubKeys {
  Key256 k_r{};  // mask (statistical) key
  Key256 k_p{};  // permutation key
};

// k_r = HMAC-SHA256(master, "mask"), k_p = HMAC-SHA256(master, "perm").
// The distinct labels domain-separate the two derivations.
SubKeys derive_subkeys(const MasterKey& master);

namespace detail {
std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t n);
std::array<std::uint8_t, 32> hmac_sha256(const std::uint8_t* key, std::size_t key_len,
                                         const std::uint8_t* msg, std::size_t msg_len);
}  // namespace detail

// Deterministic per-(key, block index) byte stream.
//
// The frozen default generator is ChaCha20 in its original configuration
// (64-bit little-endian block counter, 64-bit little-endian nonce); the
// block index is the nonce, and the counter starts at zero. Successive
// next_* calls advance a byte cursor through one continuous stream.
class BlockKeystream {
 public:
  BlockKeystream(const Key256& key, std::uint64_t block_index);

  void next_bytes(std::uint8_t* out, std::size_t n);
  std::vector<std::uint8_t> next_bytes(std::size_t n);
  std::uint32_t next_u32();  // 4 stream bytes, little-endian

  // Unbiased integer in [0, bound) by rejection sampling: draw 32-bit words,
  // discard those >= floor(2^32/bound)*bound, reduce the survivor mod bound.
  // bound == 1 returns 0 without consuming stream bytes.
  std::uint32_t uniform_below(std::uint32_t bound);

  std::uint64_t cursor() const { return cursor_; }

 private:
  void refill();

  std::array<std::uint32_t, 16> state_{};
  std::array<std::uint8_t, 64> block_{};
  std::uint64_t cursor_ = 0;
};

// One-shot convenience: the first n bytes of the (key, block_index) stream.
std::vector<std::uint8_t> keystream_bytes(const Key256& key, std::uint64_t block_index,
                                          std::size_t n);

// Bijection on [0, n): applying it to a vector x yields out[k] = x[map[k]].
struct Permutation {
  std::vector<std::uint32_t> map;

  std::size_t size() const { return map.size(); }
  Permutation inverse() const;
};

// Unbiased Fisher-Yates shuffle of the identity, driven by the (k_p, block
// index) keystream: for i = n-1 down to 1, j = uniform_below(i+1), swap.
Permutation gen_permutation(const Key256& k_p, std::uint64_t block_index, std::size_t n);

// Per-block mask with entries uniform over the 2t signed levels
// {±1, ±2, ..., ±t}. Entries are never zero, so the mask is invertible
// element-wise.
struct MaskVector {
  std::vector<std::int32_t> levels;

  std::size_t size() const { return levels.size(); }
};

// Each entry consumes one uniform draw v in [0, 2t):
// magnitude = v/2 + 1, sign = + for even v, - for odd v.
MaskVector gen_mask(const Key256& k_r, std::uint64_t block_index, std::size_t n, int t = 16);

// Master key I/O. Key files hold 64 hex characters (surrounding whitespace
// ignored). Loading warns on stderr if the file is group/world-readable.
MasterKey master_key_from_hex(const std::string& hex);  // throws KeyError
MasterKey load_master_key_file(const std::string& path);
MasterKey load_master_key_env(const char* var = "MPCC_MASTER_KEY");
void save_master_key_file(const MasterKey& key, const std::string& path);
MasterKey random_master_key();  // OS entropy; not reproducible by design
std::string master_key_hex(const MasterKey& key);

}  // namespace mpcc
