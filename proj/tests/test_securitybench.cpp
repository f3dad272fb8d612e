// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mpcc/errors.hpp"
#include "mpcc/securitybench.hpp"

using namespace mpcc;

TEST_CASE("primality check agrees with the first primes") {
  const std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
  for (std::uint64_t p : primes) CHECK(is_prime(p));
  const std::uint64_t composites[] = {0, 1, 4, 6, 8, 9, 15, 21, 25, 27, 33};
  for (std::uint64_t c : composites) CHECK_FALSE(is_prime(c));
}

TEST_CASE("mod-5 ciphertext table matches the multiplication table") {
  auto table = secrecy_table(5);
  REQUIRE(table.size() == 4);
  // Identity row: r = 1 maps each message to itself.
  CHECK(table[0] == std::vector<std::uint32_t>({1, 2, 3, 4}));
  // Two published spot values: 2*3 = 6 = 1 (mod 5) and 3*2 = 1 (mod 5).
  CHECK(table[1][2] == 1);
  CHECK(table[2][1] == 1);
  // Full table for completeness.
  CHECK(table[1] == std::vector<std::uint32_t>({2, 4, 1, 3}));
  CHECK(table[2] == std::vector<std::uint32_t>({3, 1, 4, 2}));
  CHECK(table[3] == std::vector<std::uint32_t>({4, 3, 2, 1}));
}

TEST_CASE("table rows and columns are permutations of the nonzero field") {
  for (std::uint32_t p : {3u, 5u, 7u, 11u}) {
    auto table = secrecy_table(p);
    REQUIRE(table.size() == std::size_t(p - 1));
    for (std::size_t r = 0; r < table.size(); ++r) {
      std::vector<bool> seen_row(p, false), seen_col(p, false);
      for (std::size_t m = 0; m < table.size(); ++m) {
        CHECK_FALSE(seen_row[table[r][m]]);
        seen_row[table[r][m]] = true;
        CHECK_FALSE(seen_col[table[m][r]]);
        seen_col[table[m][r]] = true;
      }
    }
  }
}

TEST_CASE("composite and undersized moduli are rejected") {
  CHECK_THROWS_AS(secrecy_table(4), NotPrime);
  CHECK_THROWS_AS(secrecy_table(2), NotPrime);  // table needs p >= 3
  CHECK_THROWS_AS(secrecy_table(1), NotPrime);
  CHECK_THROWS_AS(verify_perfect_secrecy(6), NotPrime);
  CHECK_THROWS_AS(verify_perfect_secrecy(0), NotPrime);
}

TEST_CASE("perfect secrecy holds for the published field") {
  SecrecyReport report = verify_perfect_secrecy(5);
  CHECK(report.perfect);
  REQUIRE(report.counts.size() == 4);
  // Exactly one key maps each message to each ciphertext: Pr(c) = 1/4.
  for (const auto& row : report.counts)
    for (std::uint32_t count : row) CHECK(count == 1);
}

TEST_CASE("perfect secrecy holds for every prime up to 31") {
  for (std::uint32_t p = 2; p <= 31; ++p) {
    if (!is_prime(p)) continue;
    SecrecyReport report = verify_perfect_secrecy(p);
    CHECK(report.perfect);
  }
}

TEST_CASE("a degenerate two-element field is perfectly secret") {
  // One nonzero message, one key: the single ciphertext has probability 1.
  SecrecyReport report = verify_perfect_secrecy(2);
  CHECK(report.perfect);
  REQUIRE(report.counts.size() == 1);
  CHECK(report.counts[0][0] == 1);
}

TEST_CASE("brute-force counts match hand arithmetic") {
  BruteForceCounts c = brute_force_counts(4, 2, 16);
  CHECK(c.index_count == 12);   // 4 * 3
  CHECK(c.lower_bound == 9);    // 3^2
  CHECK(c.index_count > c.lower_bound);
}

TEST_CASE("empty placement has exactly one arrangement") {
  BruteForceCounts c = brute_force_counts(4, 0, 16);
  CHECK(c.index_count == 1);
  CHECK(c.lower_bound == 1);
  CHECK(c.cloud_count_log2 == 0.0);
}

TEST_CASE("cloud attack exponent for the reference parameters") {
  // k * (log2(2t) + log2(n)) = 30 * (5 + 8) = 390 exactly.
  BruteForceCounts c = brute_force_counts(256, 30, 16);
  CHECK(c.cloud_count_log2 == 390.0);
}

TEST_CASE("index count dominates the lower bound") {
  // n!/(n-k)! = prod_{i=0..k-1} (n-i) >= (n-k+1)^k with equality only when
  // every factor equals n-k+1, i.e. k <= 1. Strict dominance needs k >= 2.
  for (std::uint64_t n = 2; n <= 64; ++n) {
    for (std::uint64_t k = 1; k < n; ++k) {
      BruteForceCounts c = brute_force_counts(n, k, 16);
      CHECK(c.index_count >= c.lower_bound);
      if (k >= 2) CHECK(c.index_count > c.lower_bound);
      if (k == 1) CHECK(c.index_count == c.lower_bound);  // both equal n
    }
  }
}

TEST_CASE("oversized sparsity is rejected") {
  CHECK_THROWS_AS(brute_force_counts(4, 5, 16), BadArgs);
  CHECK_THROWS_AS(brute_force_counts(4, 2, 0), BadArgs);
}

TEST_CASE("counts overflow 64-bit arithmetic but stay exact") {
  BruteForceCounts c = brute_force_counts(256, 30, 16);
  // 256!/226! has 72 digits; spot-check the leading digits via string form.
  const std::string s = c.index_count.str();
  CHECK(s.size() == 72);
  CHECK(s.substr(0, 6) == "301395");
}
