// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "mpcc/bytes.hpp"
#include "mpcc/errors.hpp"
#include "mpcc/keyschedule.hpp"

using namespace mpcc;

namespace {

Key256 key_from_hex(const std::string& hex) {
  auto raw = from_hex(hex);
  REQUIRE(raw.size() == 32);
  Key256 k;
  std::memcpy(k.data(), raw.data(), 32);
  return k;
}

MasterKey sequential_master() {
  MasterKey m;
  for (int i = 0; i < 32; ++i) m.secret[i] = std::uint8_t(i);
  return m;
}

int popcount_diff(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  int bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t x = a[i] ^ b[i];
    while (x) {
      bits += x & 1;
      x >>= 1;
    }
  }
  return bits;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  // FIPS 180-2 test vectors.
  auto d1 = detail::sha256(reinterpret_cast<const std::uint8_t*>("abc"), 3);
  CHECK(to_hex(d1.data(), 32) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  auto d2 = detail::sha256(nullptr, 0);
  CHECK(to_hex(d2.data(), 32) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  const char* msg448 = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
  auto d3 = detail::sha256(reinterpret_cast<const std::uint8_t*>(msg448), 56);
  CHECK(to_hex(d3.data(), 32) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

  // One million 'a' characters exercises multi-block streaming and padding.
  std::vector<std::uint8_t> million(1000000, 'a');
  auto d4 = detail::sha256(million.data(), million.size());
  CHECK(to_hex(d4.data(), 32) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("hmac-sha256 known answers") {
  // RFC 4231 test case 1.
  std::vector<std::uint8_t> key(20, 0x0b);
  const char* msg = "Hi There";
  auto mac = detail::hmac_sha256(key.data(), key.size(),
                                 reinterpret_cast<const std::uint8_t*>(msg), 8);
  CHECK(to_hex(mac.data(), 32) ==
        "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");

  // RFC 4231 test case 2 ("Jefe").
  const char* key2 = "Jefe";
  const char* msg2 = "what do ya want for nothing?";
  auto mac2 = detail::hmac_sha256(reinterpret_cast<const std::uint8_t*>(key2), 4,
                                  reinterpret_cast<const std::uint8_t*>(msg2), 28);
  CHECK(to_hex(mac2.data(), 32) ==
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");

  // RFC 4231 test case 6 exercises the key-longer-than-block path.
  std::vector<std::uint8_t> key6(131, 0xaa);
  const char* msg6 = "Test Using Larger Than Block-Size Key - Hash Key First";
  auto mac6 = detail::hmac_sha256(key6.data(), key6.size(),
                                  reinterpret_cast<const std::uint8_t*>(msg6), 54);
  CHECK(to_hex(mac6.data(), 32) ==
        "60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54");
}

TEST_CASE("subkey derivation is deterministic and matches frozen values") {
  MasterKey zero;
  SubKeys keys = derive_subkeys(zero);
  CHECK(to_hex(keys.k_r.data(), 32) ==
        "3a0a8ef0a40112c99852dda5d6d32952107bea33a551bcf52c78b20590148ed2");
  CHECK(to_hex(keys.k_p.data(), 32) ==
        "edd637f416126d25e7c1b1d2155f80b897ea4014a01eb1ca6d8d55e05f1a9472");

  SubKeys keys2 = derive_subkeys(sequential_master());
  CHECK(to_hex(keys2.k_r.data(), 32) ==
        "f424e38f88377bf660bc5ee38d45843c0f940593a8ee8f7069d073d4495aeee1");
  CHECK(to_hex(keys2.k_p.data(), 32) ==
        "96953103f71fadb3f23d84aa546074c8dfe2a634c85f2a5bb75a7bbfecacacf2");

  // Same master twice yields the same subkeys.
  SubKeys again = derive_subkeys(zero);
  CHECK(again.k_r == keys.k_r);
  CHECK(again.k_p == keys.k_p);

  // The two class keys never coincide.
  CHECK(keys.k_r != keys.k_p);
  CHECK(keys2.k_r != keys2.k_p);
}

TEST_CASE("keystream matches the original stream cipher test vector") {
  // All-zero key, nonce 0: the classical first-block output of the cipher.
  Key256 zero{};
  auto bytes = keystream_bytes(zero, 0, 64);
  CHECK(to_hex(bytes.data(), 64) ==
        "76b8e0ada0f13d90405d6ae55386bd28bdd219b8a08ded1aa836efcc8b770dc7"
        "da41597c5157488d7724e03fb8d84a376a43b8f41518a11cc387b669b2ee6586");
}

TEST_CASE("keystream frozen vector for nonzero key and index") {
  Key256 k = key_from_hex("000102030405060708090a0b0c0d0e0f"
                          "101112131415161718191a1b1c1d1e1f");
  auto bytes = keystream_bytes(k, 1, 32);
  CHECK(to_hex(bytes.data(), 32) ==
        "2fa4f10250808e89a25231e50fdf6ee071c65f21ef9eee784c3f2d89061ae895");
}

TEST_CASE("keystream is continuous across read granularities") {
  Key256 k = key_from_hex("000102030405060708090a0b0c0d0e0f"
                          "101112131415161718191a1b1c1d1e1f");
  auto whole = keystream_bytes(k, 7, 300);

  BlockKeystream piecewise(k, 7);
  std::vector<std::uint8_t> got;
  for (std::size_t take : {1u, 3u, 60u, 64u, 100u, 72u}) {
    auto chunk = piecewise.next_bytes(take);
    got.insert(got.end(), chunk.begin(), chunk.end());
  }
  REQUIRE(got.size() == 300);
  CHECK(got == whole);
  CHECK(piecewise.cursor() == 300);
}

TEST_CASE("different block indices give unrelated streams") {
  Key256 k{};
  k[0] = 0x42;
  auto a = keystream_bytes(k, 0, 16);
  auto b = keystream_bytes(k, 1, 16);
  auto c = keystream_bytes(k, 0x100000000ull, 16);  // differs only in high nonce word
  CHECK(a != b);
  CHECK(a != c);
  CHECK(b != c);
}

TEST_CASE("keystream avalanche on key bits") {
  // Flipping one key bit should change about half the output bits. Over
  // 1000 single-bit flips the mean Hamming distance on 32 output bytes
  // (256 bits) concentrates tightly around 128; 112..144 is > 8 sigma.
  Key256 base{};
  for (int i = 0; i < 32; ++i) base[i] = std::uint8_t(0x5A + i);
  auto ref = keystream_bytes(base, 3, 32);
  long total_bits = 0;
  int trials = 0;
  for (int bit = 0; bit < 256 && trials < 1000; ++bit, ++trials) {
    Key256 flipped = base;
    flipped[bit / 8] ^= std::uint8_t(1u << (bit % 8));
    auto out = keystream_bytes(flipped, 3, 32);
    total_bits += popcount_diff(ref.data(), out.data(), 32);
  }
  double mean = double(total_bits) / trials;
  CHECK(mean > 112.0);
  CHECK(mean < 144.0);
}

TEST_CASE("keystream bytes are uniform") {
  // Chi-squared goodness of fit over 10^6 bytes against the uniform byte
  // distribution, 255 degrees of freedom. Threshold is the 0.99 quantile,
  // so a correct stream fails with probability 0.01.
  Key256 k = key_from_hex("d0d1d2d3d4d5d6d7d8d9dadbdcdddedf"
                          "e0e1e2e3e4e5e6e7e8e9eaebecedeeef");
  const std::size_t n = 1000000;
  auto bytes = keystream_bytes(k, 11, n);
  std::array<std::uint64_t, 256> counts{};
  for (std::uint8_t b : bytes) counts[b]++;
  const double expected = double(n) / 256.0;
  double chi2 = 0.0;
  for (auto c : counts) {
    double d = double(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 310.45738821990585);
}

TEST_CASE("uniform_below consumption and edge cases") {
  Key256 k{};
  BlockKeystream s(k, 0);
  CHECK(s.uniform_below(1) == 0);
  CHECK(s.cursor() == 0);  // bound 1 consumes nothing

  std::uint32_t v = s.uniform_below(10);
  CHECK(v < 10);
  CHECK(s.cursor() >= 4);

  BlockKeystream s2(k, 0);
  CHECK_THROWS_AS(s2.uniform_below(0), BadArgs);
}

TEST_CASE("uniform_below is unbiased across its range") {
  // With bound 6 over 600000 draws each value expects 100000 hits;
  // chi-squared with 5 dof at the 0.999 quantile is 20.515.
  Key256 k{};
  k[31] = 0x77;
  BlockKeystream s(k, 5);
  std::array<std::uint64_t, 6> counts{};
  for (int i = 0; i < 600000; ++i) counts[s.uniform_below(6)]++;
  double chi2 = 0.0;
  for (auto c : counts) {
    double d = double(c) - 100000.0;
    chi2 += d * d / 100000.0;
  }
  CHECK(chi2 < 20.515);
}

TEST_CASE("permutation matches a straight-line shuffle oracle") {
  // Independent re-derivation of the expected n = 4 permutation: unrolled
  // Fisher-Yates fed by the same keystream, no loop over i.
  MasterKey zero;
  SubKeys keys = derive_subkeys(zero);

  BlockKeystream s(keys.k_p, 0);
  std::array<std::uint32_t, 4> arr = {0, 1, 2, 3};
  auto draw = [&s](std::uint32_t bound) {
    const std::uint64_t limit = (0x100000000ull / bound) * bound;
    for (;;) {
      std::uint8_t b[4];
      s.next_bytes(b, 4);
      std::uint32_t u = load_u32_le(b);
      if (u < limit) return u % bound;
    }
  };
  std::swap(arr[3], arr[draw(4)]);
  std::swap(arr[2], arr[draw(3)]);
  std::swap(arr[1], arr[draw(2)]);

  Permutation p = gen_permutation(keys.k_p, 0, 4);
  REQUIRE(p.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(p.map[i] == arr[i]);

  // Frozen value of the oracle above.
  CHECK(p.map == std::vector<std::uint32_t>{3, 2, 1, 0});
}

TEST_CASE("permutation is a bijection") {
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  for (std::size_t n : {1u, 2u, 37u, 256u, 512u}) {
    Permutation p = gen_permutation(keys.k_p, 9, n);
    REQUIRE(p.size() == n);
    std::set<std::uint32_t> seen(p.map.begin(), p.map.end());
    CHECK(seen.size() == n);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == n - 1);
  }
}

TEST_CASE("permutation inverse composes to identity") {
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  Permutation p = gen_permutation(keys.k_p, 2, 256);
  Permutation inv = p.inverse();
  for (std::uint32_t k = 0; k < 256; ++k) {
    CHECK(inv.map[p.map[k]] == k);
    CHECK(p.map[inv.map[k]] == k);
  }
}

TEST_CASE("permutations differ across block indices and keys") {
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  Permutation a = gen_permutation(keys.k_p, 0, 256);
  Permutation b = gen_permutation(keys.k_p, 1, 256);
  Permutation c = gen_permutation(keys.k_r, 0, 256);  // different key
  CHECK(a.map != b.map);
  CHECK(a.map != c.map);

  // Determinism: regeneration is exact.
  Permutation a2 = gen_permutation(keys.k_p, 0, 256);
  CHECK(a.map == a2.map);
}

TEST_CASE("permutation shuffle is unbiased") {
  // For a uniform random permutation of size 4, each of the 24 orderings
  // is equally likely. 24000 samples, chi-squared 23 dof, 0.999 quantile
  // is 49.73.
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  std::map<std::vector<std::uint32_t>, int> counts;
  const int trials = 24000;
  for (int i = 0; i < trials; ++i) {
    Permutation p = gen_permutation(keys.k_p, 1000 + std::uint64_t(i), 4);
    counts[p.map]++;
  }
  REQUIRE(counts.size() == 24);
  double expected = trials / 24.0;
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) {
    double d = double(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 49.73);
}

TEST_CASE("mask matches frozen values and level coding") {
  MasterKey zero;
  SubKeys keys = derive_subkeys(zero);
  MaskVector mask = gen_mask(keys.k_r, 0, 8, 16);
  REQUIRE(mask.size() == 8);
  CHECK(mask.levels == std::vector<std::int32_t>{7, 8, -4, -15, 12, 15, -7, 9});
}

TEST_CASE("mask entries are nonzero and within range") {
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  for (int t : {1, 2, 16, 100}) {
    MaskVector mask = gen_mask(keys.k_r, 3, 4096, t);
    for (std::int32_t v : mask.levels) {
      CHECK(v != 0);
      CHECK(std::abs(v) >= 1);
      CHECK(std::abs(v) <= t);
    }
  }
}

TEST_CASE("mask levels are uniform over all 2t values") {
  // t = 4 gives 8 levels; 80000 entries expect 10000 each.
  // Chi-squared 7 dof, 0.999 quantile is 24.32.
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  MaskVector mask = gen_mask(keys.k_r, 8, 80000, 4);
  std::map<std::int32_t, int> counts;
  for (std::int32_t v : mask.levels) counts[v]++;
  REQUIRE(counts.size() == 8);
  double chi2 = 0.0;
  for (const auto& [level, c] : counts) {
    double d = double(c) - 10000.0;
    chi2 += d * d / 10000.0;
  }
  CHECK(chi2 < 24.32);
}

TEST_CASE("mask is deterministic per (key, index) and varies across indices") {
  MasterKey m = sequential_master();
  SubKeys keys = derive_subkeys(m);
  MaskVector a = gen_mask(keys.k_r, 4, 512, 16);
  MaskVector a2 = gen_mask(keys.k_r, 4, 512, 16);
  MaskVector b = gen_mask(keys.k_r, 5, 512, 16);
  CHECK(a.levels == a2.levels);
  CHECK(a.levels != b.levels);
}

TEST_CASE("master key hex parsing") {
  std::string hex =
      "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f";
  MasterKey k = master_key_from_hex(hex);
  CHECK(k.secret == sequential_master().secret);
  CHECK(master_key_hex(k) == hex);

  // Whitespace around the digits is tolerated.
  MasterKey k2 = master_key_from_hex("  " + hex + "\n");
  CHECK(k2.secret == k.secret);

  CHECK_THROWS_AS(master_key_from_hex("abcd"), KeyError);
  CHECK_THROWS_AS(master_key_from_hex(std::string(63, '0') + "g"), KeyError);
}

TEST_CASE("master key file round trip") {
  std::string path = "test_key_roundtrip.hex";
  MasterKey k = master_key_from_hex(
      "deadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeef");
  save_master_key_file(k, path);
  MasterKey back = load_master_key_file(path);
  CHECK(back.secret == k.secret);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_master_key_file("does_not_exist.hex"), KeyError);
}

TEST_CASE("random master keys are distinct") {
  MasterKey a = random_master_key();
  MasterKey b = random_master_key();
  CHECK(a.secret != b.secret);
}
