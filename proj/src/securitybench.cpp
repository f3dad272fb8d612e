// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/securitybench.hpp"

#include <cmath>

#include "mpcc/errors.hpp"

namespace mpcc {

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  if (p % 2 == 0) return p == 2;
  for (std::uint64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

std::vector<std::vector<std::uint32_t>> secrecy_table(std::uint32_t p) {
  if (!is_prime(p)) throw NotPrime("secrecy_table: modulus must be prime");
  if (p < 3) throw NotPrime("secrecy_table: need p >= 3 for a nontrivial table");
  std::vector<std::vector<std::uint32_t>> table(p - 1, std::vector<std::uint32_t>(p - 1));
  for (std::uint32_t r = 1; r < p; ++r)
    for (std::uint32_t m = 1; m < p; ++m)
      table[r - 1][m - 1] = std::uint32_t((std::uint64_t(r) * m) % p);
  return table;
}

SecrecyReport verify_perfect_secrecy(std::uint32_t p) {
  if (!is_prime(p)) throw NotPrime("verify_perfect_secrecy: modulus must be prime");
  SecrecyReport report;
  report.p = p;
  // p = 2 is the degenerate single-message, single-key field; the loops
  // below handle it uniformly (one 1x1 count table).
  report.counts.assign(p - 1, std::vector<std::uint32_t>(p - 1, 0));
  for (std::uint32_t m = 1; m < p; ++m)
    for (std::uint32_t r = 1; r < p; ++r) {
      std::uint32_t c = std::uint32_t((std::uint64_t(r) * m) % p);
      // c is never 0: r, m nonzero in a prime field
      report.counts[m - 1][c - 1]++;
    }
  report.perfect = true;
  for (const auto& row : report.counts)
    for (std::uint32_t cnt : row)
      if (cnt != 1) report.perfect = false;
  return report;
}

BruteForceCounts brute_force_counts(std::uint64_t n, std::uint64_t k, std::uint64_t t) {
  if (k > n) throw BadArgs("brute_force_counts: k must be <= n");
  if (n < 1) throw BadArgs("brute_force_counts: n must be >= 1");
  if (t < 1) throw BadArgs("brute_force_counts: t must be >= 1");

  BruteForceCounts out;
  out.index_count = 1;
  for (std::uint64_t i = 0; i < k; ++i) out.index_count *= BigInt(n - i);

  out.lower_bound = 1;
  const BigInt base(n - k + 1);
  for (std::uint64_t i = 0; i < k; ++i) out.lower_bound *= base;

  out.cloud_count_log2 = double(k) * (std::log2(2.0 * double(t)) + std::log2(double(n)));
  return out;
}

}  // namespace mpcc
