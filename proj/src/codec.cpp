// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/codec.hpp"

#include <algorithm>
#include <cmath>

#include "mpcc/errors.hpp"

namespace mpcc {

Eigen::VectorXd apply_permutation(const Permutation& p, const Eigen::VectorXd& x) {
  if (Eigen::Index(p.size()) != x.size())
    throw DimensionMismatch("apply_permutation: length mismatch");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) out(k) = x(Eigen::Index(p.map[std::size_t(k)]));
  return out;
}

Eigen::VectorXd undo_permutation(const Permutation& p, const Eigen::VectorXd& v) {
  if (Eigen::Index(p.size()) != v.size())
    throw DimensionMismatch("undo_permutation: length mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(Eigen::Index(p.map[std::size_t(k)])) = v(k);
  return out;
}

Eigen::VectorXd whiten(const Permutation& p, const MaskVector& r, const Eigen::VectorXd& x,
                       bool permute) {
  if (Eigen::Index(r.size()) != x.size()) throw DimensionMismatch("whiten: mask length mismatch");
  Eigen::VectorXd w = permute ? apply_permutation(p, x) : x;
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) *= double(r.levels[std::size_t(i)]);
  return w;
}

namespace {

Eigen::VectorXd unmask(const MaskVector& r, const Eigen::VectorXd& z) {
  if (Eigen::Index(r.size()) != z.size()) throw DimensionMismatch("unmask: length mismatch");
  Eigen::VectorXd v(z.size());
  // Mask levels are nonzero integers, so the division is exact inverse
  // scaling, never a division by zero.
  for (Eigen::Index i = 0; i < z.size(); ++i) v(i) = z(i) / double(r.levels[std::size_t(i)]);
  return v;
}

Eigen::VectorXd pre_measurement_vector(const PlainBlock& block, const OrthoBasis* basis,
                                       const Permutation& p, const MaskVector& r) {
  if (block.kind == BlockKind::TransformSparse) {
    if (!basis) throw MissingBasis("enc_block: transform block without a basis");
    Eigen::VectorXd theta = analyze(*basis, block.values);
    return whiten(p, r, theta, block.sensitive);
  }
  if (basis) throw BadArgs("enc_block: canonical block does not take a basis");
  return whiten(p, r, block.values, true);
}

}  // namespace

CipherBlock enc_block(const SubKeys& keys, const SensingMatrix& phi, const PlainBlock& block,
                      const OrthoBasis* basis, int t) {
  if (block.values.size() == 0) throw BadDimensions("enc_block: empty block");
  if (block.values.size() != phi.n)
    throw DimensionMismatch("enc_block: block length does not match sensing matrix");
  const std::size_t n = std::size_t(phi.n);
  Permutation p = gen_permutation(keys.k_p, block.index, n);
  MaskVector r = gen_mask(keys.k_r, block.index, n, t);
  Eigen::VectorXd w = pre_measurement_vector(block, basis, p, r);

  CipherBlock cipher;
  cipher.measurements = measure(phi, w);
  cipher.index = block.index;
  cipher.sensitive = block.sensitive;
  cipher.transform_mode = (block.kind == BlockKind::TransformSparse);
  return cipher;
}

CipherBlock enc_block_with(const Permutation& p, const MaskVector& r, const SensingMatrix& phi,
                           const PlainBlock& block, const OrthoBasis* basis) {
  if (block.values.size() == 0) throw BadDimensions("enc_block_with: empty block");
  if (block.values.size() != phi.n)
    throw DimensionMismatch("enc_block_with: block length does not match sensing matrix");
  Eigen::VectorXd w = pre_measurement_vector(block, basis, p, r);

  CipherBlock cipher;
  cipher.measurements = measure(phi, w);
  cipher.index = block.index;
  cipher.sensitive = block.sensitive;
  cipher.transform_mode = (block.kind == BlockKind::TransformSparse);
  return cipher;
}

PlainBlock dec_super(const SubKeys& keys, const DecompressedBlock& block,
                     const OrthoBasis* basis, bool was_sensitive, int t) {
  const std::size_t n = std::size_t(block.z.size());
  if (n == 0) throw BadDimensions("dec_super: empty block");
  MaskVector r = gen_mask(keys.k_r, block.index, n, t);
  Eigen::VectorXd v = unmask(r, block.z);

  PlainBlock out;
  out.index = block.index;
  out.sensitive = was_sensitive;
  if (basis) {
    if (basis->size() != block.z.size())
      throw DimensionMismatch("dec_super: basis does not match block length");
    out.kind = BlockKind::TransformSparse;
    if (was_sensitive) {
      Permutation p = gen_permutation(keys.k_p, block.index, n);
      v = undo_permutation(p, v);
    }
    out.values = synthesize(*basis, v);
  } else {
    out.kind = BlockKind::CanonicalSparse;
    Permutation p = gen_permutation(keys.k_p, block.index, n);
    out.values = undo_permutation(p, v);
  }
  return out;
}

PlainBlock dec_semi(const Key256& k_r, const DecompressedBlock& block, const OrthoBasis* basis,
                    bool was_sensitive, int t) {
  const std::size_t n = std::size_t(block.z.size());
  if (n == 0) throw BadDimensions("dec_semi: empty block");
  MaskVector r = gen_mask(k_r, block.index, n, t);
  Eigen::VectorXd v = unmask(r, block.z);

  PlainBlock out;
  out.index = block.index;
  out.sensitive = was_sensitive;
  if (basis) {
    if (basis->size() != block.z.size())
      throw DimensionMismatch("dec_semi: basis does not match block length");
    out.kind = BlockKind::TransformSparse;
    out.values = synthesize(*basis, v);
  } else {
    out.kind = BlockKind::CanonicalSparse;
    out.values = v;
  }
  return out;
}

BlockStats permuted_stats(const Eigen::VectorXd& xp, const HistogramSpec& spec) {
  if (spec.bins < 1) throw BadArgs("permuted_stats: bins must be >= 1");
  BlockStats stats;
  const Eigen::Index n = xp.size();
  if (n == 0) {
    stats.histogram.assign(std::size_t(spec.bins), 0);
    return stats;
  }

  stats.mean = xp.mean();
  stats.variance = (xp.array() - stats.mean).square().sum() / double(n);

  double lo = spec.lo, hi = spec.hi;
  if (lo >= hi) {
    lo = xp.minCoeff();
    hi = xp.maxCoeff();
    if (lo == hi) hi = lo + 1.0;  // constant data still gets a valid bin width
  }
  stats.bin_lo = lo;
  stats.bin_hi = hi;
  stats.histogram.assign(std::size_t(spec.bins), 0);
  const double width = (hi - lo) / double(spec.bins);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto bin = Eigen::Index((xp(i) - lo) / width);
    bin = std::clamp<Eigen::Index>(bin, 0, spec.bins - 1);
    stats.histogram[std::size_t(bin)]++;
  }
  return stats;
}

BlockStats permuted_stats(const PlainBlock& xp, const HistogramSpec& spec) {
  return permuted_stats(xp.values, spec);
}

}  // namespace mpcc
