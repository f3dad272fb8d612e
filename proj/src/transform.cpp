// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/transform.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mpcc/bytes.hpp"
#include "mpcc/errors.hpp"

namespace mpcc {

OrthoBasis dct_basis(Eigen::Index n) {
  if (n < 1) throw BadDimensions("dct_basis: n must be >= 1");
  OrthoBasis basis;
  basis.kind = BasisKind::DCT;
  basis.matrix.resize(n, n);
  const double c0 = std::sqrt(1.0 / double(n));
  const double ck = std::sqrt(2.0 / double(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = (k == 0) ? c0 : ck;
    for (Eigen::Index i = 0; i < n; ++i) {
      basis.matrix(i, k) =
          scale * std::cos(M_PI * (2.0 * double(i) + 1.0) * double(k) / (2.0 * double(n)));
    }
  }
  return basis;
}

OrthoBasis klt_train(const std::vector<Eigen::VectorXd>& training_blocks) {
  if (training_blocks.size() < 2)
    throw BadArgs("klt_train: need at least 2 training blocks");
  const Eigen::Index n = training_blocks.front().size();
  if (n < 1) throw BadDimensions("klt_train: empty blocks");
  for (const auto& b : training_blocks)
    if (b.size() != n) throw DimensionMismatch("klt_train: blocks differ in length");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& b : training_blocks) mean += b;
  mean /= double(training_blocks.size());

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (const auto& b : training_blocks) {
    Eigen::VectorXd d = b - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= double(training_blocks.size() - 1);

  if (cov.cwiseAbs().maxCoeff() == 0.0)
    throw DegenerateCovariance("klt_train: all training blocks are identical");

  // Jitter guarantees n well-defined eigenvectors even when the training
  // set spans fewer than n directions.
  cov.diagonal().array() += 1e-12;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw DegenerateCovariance("klt_train: eigendecomposition failed");

  // Eigen reports eigenvalues ascending; flip to descending energy order.
  OrthoBasis basis;
  basis.kind = BasisKind::KLT;
  basis.matrix.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - k);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i) != 0.0) {
        if (v(i) < 0.0) v = -v;
        break;
      }
    }
    basis.matrix.col(k) = v;
  }
  return basis;
}

Eigen::VectorXd analyze(const OrthoBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.size())
    throw DimensionMismatch("analyze: signal length does not match basis");
  return basis.matrix.transpose() * x;
}

Eigen::VectorXd synthesize(const OrthoBasis& basis, const Eigen::VectorXd& theta) {
  if (theta.size() != basis.size())
    throw DimensionMismatch("synthesize: coefficient length does not match basis");
  return basis.matrix * theta;
}

void save_basis(const OrthoBasis& basis, const std::string& path) {
  const Eigen::Index n = basis.size();
  std::vector<std::uint8_t> buf;
  buf.reserve(5 + std::size_t(n) * std::size_t(n) * 8 + 4);
  put_u8(buf, static_cast<std::uint8_t>(basis.kind));
  put_u32(buf, static_cast<std::uint32_t>(n));
  for (Eigen::Index col = 0; col < n; ++col)
    for (Eigen::Index row = 0; row < n; ++row) put_f64(buf, basis.matrix(row, col));
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("save_basis: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw ParseError("save_basis: short write to " + path);
}

OrthoBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingBasis("load_basis: cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 9) throw ParseError("load_basis: file too short");

  const std::uint32_t stored_crc = load_u32_le(buf.data() + buf.size() - 4);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw CorruptRecord("load_basis: checksum mismatch");

  const std::uint8_t kind_byte = buf[0];
  if (kind_byte > 1) throw ParseError("load_basis: unknown basis kind");
  const std::uint32_t n = load_u32_le(buf.data() + 1);
  const std::size_t expected = 5 + std::size_t(n) * std::size_t(n) * 8 + 4;
  if (buf.size() != expected) throw ParseError("load_basis: length mismatch");

  OrthoBasis basis;
  basis.kind = static_cast<BasisKind>(kind_byte);
  basis.matrix.resize(n, n);
  std::size_t off = 5;
  for (std::uint32_t col = 0; col < n; ++col)
    for (std::uint32_t row = 0; row < n; ++row, off += 8)
      basis.matrix(row, col) = load_f64_le(buf.data() + off);
  return basis;
}

}  // namespace mpcc
