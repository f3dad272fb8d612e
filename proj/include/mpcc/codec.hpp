// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Encoder-side encryption and consumer-side decryption.
//
// Encryption whitens a block with its per-index mask and permutation and
// then compresses it with the public sensing matrix:
//   canonical blocks:      y = Phi (r (.) P x)
//   transform, sensitive:  y = Phi (r (.) P theta),  theta = basis^T x
//   transform, plain:      y = Phi (r (.) theta)
// The cloud can undo only the compression (recovering the whitened vector);
// the mask key alone additionally cancels r; both keys recover x.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mpcc/keyschedule.hpp"
#include "mpcc/recovery.hpp"
#include "mpcc/sensing.hpp"
#include "mpcc/transform.hpp"

namespace mpcc {

enum class BlockKind : std::uint8_t { CanonicalSparse = 0, TransformSparse = 1 };

struct PlainBlock {
  Eigen::VectorXd values;
  std::uint64_t index = 0;
  BlockKind kind = BlockKind::CanonicalSparse;
  // Sensitive transform blocks get the permutation on top of the mask;
  // canonical blocks always get both regardless of this flag.
  bool sensitive = true;
};

struct CipherBlock {
  Eigen::VectorXd measurements;
  std::uint64_t index = 0;
  bool sensitive = true;
  bool transform_mode = false;
};

// out[k] = x[p.map[k]]
Eigen::VectorXd apply_permutation(const Permutation& p, const Eigen::VectorXd& x);
// inverse: out[p.map[k]] = v[k]
Eigen::VectorXd undo_permutation(const Permutation& p, const Eigen::VectorXd& v);

// r (.) (P x) when permute, else r (.) x.
Eigen::VectorXd whiten(const Permutation& p, const MaskVector& r, const Eigen::VectorXd& x,
                       bool permute);

// Full encoder path with keys derived per block index.
CipherBlock enc_block(const SubKeys& keys, const SensingMatrix& phi, const PlainBlock& block,
                      const OrthoBasis* basis = nullptr, int t = 16);

// Same datapath with caller-supplied permutation and mask; lets tests force
// degenerate keys (identity permutation, all-ones mask).
CipherBlock enc_block_with(const Permutation& p, const MaskVector& r, const SensingMatrix& phi,
                           const PlainBlock& block, const OrthoBasis* basis = nullptr);

// Superuser decryption: x = P^-1 (r^-1 (.) z), synthesized through the basis
// in transform mode. Exact when z is exact.
PlainBlock dec_super(const SubKeys& keys, const DecompressedBlock& block,
                     const OrthoBasis* basis = nullptr, bool was_sensitive = true, int t = 16);

// Mask-key-only decryption: x_p = r^-1 (.) z, which is P x for whitened
// blocks (a permutation of the plaintext) and exactly x for non-sensitive
// transform blocks. Synthesized through the basis in transform mode, so
// sensitive image blocks come out garbled while plain ones are exact.
PlainBlock dec_semi(const Key256& k_r, const DecompressedBlock& block,
                    const OrthoBasis* basis = nullptr, bool was_sensitive = true, int t = 16);

struct HistogramSpec {
  int bins = 16;
  // lo >= hi means derive the range from the data (min..max).
  double lo = 0.0;
  double hi = 0.0;
};

struct BlockStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  std::vector<std::uint64_t> histogram;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
};

// Mean, population variance, and a fixed-width histogram. All three are
// invariant under reordering of the input, which is what makes them
// available to the mask-key-only consumer. Out-of-range values are counted
// in the nearest edge bin so the histogram total always equals the length.
BlockStats permuted_stats(const Eigen::VectorXd& xp, const HistogramSpec& spec = {});
BlockStats permuted_stats(const PlainBlock& xp, const HistogramSpec& spec = {});

}  // namespace mpcc
