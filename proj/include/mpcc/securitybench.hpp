// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Mechanical checks of the scheme's security accounting: exhaustive
// perfect-secrecy verification of the one-time multiplicative mask over a
// small prime field, and exact brute-force operation counts for the two
// consumer classes. Counts are big integers (they overflow 64 bits almost
// immediately); a log2 form is reported for the cloud-attack bound.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace mpcc {

using BigInt = boost::multiprecision::cpp_int;

bool is_prime(std::uint64_t p);

// (p-1) x (p-1) table of c = r * m mod p over nonzero r (rows) and m
// (columns); entry [r-1][m-1].
std::vector<std::vector<std::uint32_t>> secrecy_table(std::uint32_t p);

struct SecrecyReport {
  bool perfect = false;
  std::uint32_t p = 0;
  // counts[m-1][c-1] = number of keys r with r * m = c (mod p); perfect
  // secrecy means every entry is exactly 1, i.e. Pr(c) = 1/(p-1) for all m.
  std::vector<std::vector<std::uint32_t>> counts;
};

SecrecyReport verify_perfect_secrecy(std::uint32_t p);

struct BruteForceCounts {
  BigInt index_count;     // n! / (n-k)!, ordered placements of k values
  BigInt lower_bound;     // (n-k+1)^k
  double cloud_count_log2 = 0.0;  // k * (log2(2t) + log2(n))
};

BruteForceCounts brute_force_counts(std::uint64_t n, std::uint64_t k, std::uint64_t t);

}  // namespace mpcc
