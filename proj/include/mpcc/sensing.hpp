// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Public Gaussian sensing matrix and the linear measurement model. The
// matrix is a public parameter: it is exchanged as a (seed, m, n) triple
// and regenerated identically wherever needed, never shipped as floats.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mpcc {

struct SensingMatrix {
  Eigen::MatrixXd data;  // m x n
  std::uint64_t seed = 0;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
};

// Deterministic Gaussian matrix with entries N(0, 1/m).
//
// Generator (pinned for cross-host reproducibility): mersenne twister
// mt19937_64 seeded with `seed`; each 64-bit draw x maps to the open-interval
// uniform u = ((x >> 11) + 1) * 2^-53; pairs (u1, u2) feed the Box-Muller
// transform sqrt(-2 ln u1) * (cos, sin)(2 pi u2); the resulting standard
// normals fill the matrix row-major and are scaled by 1/sqrt(m).
//
// m == n is allowed so a unit sampling rate degenerates to an invertible
// square system; m > n is rejected.
SensingMatrix gen_sensing_matrix(std::uint64_t seed, Eigen::Index m, Eigen::Index n);

// y = phi * z. Rows are computed independently (parallel-safe) with a fixed
// per-row accumulation order, so the result is bit-identical at any thread
// count. threads = 0 means use the ambient default.
Eigen::VectorXd measure(const SensingMatrix& phi, const Eigen::VectorXd& z, int threads = 0);

namespace reference {
// Single-threaded baseline for the parallel kernel above, with an optional
// fused-multiply-add flop tally (2 flops per term) for cost accounting.
Eigen::VectorXd measure_serial(const SensingMatrix& phi, const Eigen::VectorXd& z,
                               std::uint64_t* flops = nullptr);
}  // namespace reference

}  // namespace mpcc
