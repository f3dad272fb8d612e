// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sparsifying transforms. A basis is an n x n orthonormal matrix whose
// columns are the basis vectors; analysis projects a signal onto them and
// synthesis reassembles it. Basis objects are immutable once built, so all
// operations here are reentrant.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace mpcc {

enum class BasisKind : std::uint8_t { DCT = 0, KLT = 1 };

struct OrthoBasis {
  Eigen::MatrixXd matrix;  // n x n, orthonormal columns
  BasisKind kind = BasisKind::DCT;

  Eigen::Index size() const { return matrix.rows(); }
};

// Orthonormal DCT-II basis. Column k sampled at point i is
// c_k * cos(pi*(2i+1)*k / (2n)) with c_0 = sqrt(1/n), c_k = sqrt(2/n).
OrthoBasis dct_basis(Eigen::Index n);

// Data-trained basis: eigenvectors of the sample covariance of the
// mean-removed training blocks, columns ordered by descending eigenvalue.
// Sign convention: the first nonzero component of each column is positive,
// so training is reproducible across solvers. A tiny diagonal jitter
// (1e-12 * I) keeps the decomposition full-rank on low-rank training sets;
// an identically zero covariance (all blocks equal) is rejected.
// Analysis projects raw blocks, mean included, so the training set must be
// large and varied enough that the leading eigenvectors span the blocks'
// mean brightness; a handful of training blocks leaves that direction
// unrepresented and every coefficient vector dense, which defeats sparse
// recovery downstream. Sample covariance rank is also capped by the block
// count, so training sets smaller than the block dimension cannot carry
// spectral detail beyond their own span.
OrthoBasis klt_train(const std::vector<Eigen::VectorXd>& training_blocks);

// theta = basis^T x
Eigen::VectorXd analyze(const OrthoBasis& basis, const Eigen::VectorXd& x);

// x = basis * theta
Eigen::VectorXd synthesize(const OrthoBasis& basis, const Eigen::VectorXd& theta);

// Flat binary container: kind byte, n as u32 little-endian, n*n float64
// little-endian column-major, CRC32 (little-endian) over all prior bytes.
void save_basis(const OrthoBasis& basis, const std::string& path);
OrthoBasis load_basis(const std::string& path);

}  // namespace mpcc
