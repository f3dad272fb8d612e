// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/sensing.hpp"

#include <cmath>
#include <random>

#include "mpcc/errors.hpp"
#include "mpcc/parallel.hpp"

namespace mpcc {

namespace {

// Gaussian stream with the exact draw discipline documented in the header.
class PinnedGaussian {
 public:
  explicit PinnedGaussian(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double next_unit() {
    // (x >> 11) is uniform on [0, 2^53); +1 shifts to (0, 2^53], so the
    // result lies in (0, 1] and log() never sees zero.
    const std::uint64_t x = rng_();
    return double((x >> 11) + 1) * 0x1p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

SensingMatrix gen_sensing_matrix(std::uint64_t seed, Eigen::Index m, Eigen::Index n) {
  if (m < 1 || n < 1 || m > n)
    throw BadDimensions("gen_sensing_matrix: need 1 <= m <= n");
  SensingMatrix phi;
  phi.seed = seed;
  phi.m = m;
  phi.n = n;
  phi.data.resize(m, n);
  PinnedGaussian gauss(seed);
  const double scale = 1.0 / std::sqrt(double(m));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) phi.data(i, j) = scale * gauss.next();
  return phi;
}

Eigen::VectorXd measure(const SensingMatrix& phi, const Eigen::VectorXd& z, int threads) {
  if (z.size() != phi.n)
    throw DimensionMismatch("measure: vector length does not match matrix");
  Eigen::VectorXd y(phi.m);
  const Eigen::MatrixXd& a = phi.data;
  parallel_for(
      std::size_t(phi.m),
      [&](std::size_t i) {
        // Fixed left-to-right accumulation: the row sum is independent of
        // the thread schedule, so parallel and serial outputs are identical.
        double acc = 0.0;
        for (Eigen::Index j = 0; j < phi.n; ++j) acc += a(Eigen::Index(i), j) * z(j);
        y(Eigen::Index(i)) = acc;
      },
      threads);
  return y;
}

namespace reference {

Eigen::VectorXd measure_serial(const SensingMatrix& phi, const Eigen::VectorXd& z,
                               std::uint64_t* flops) {
  if (z.size() != phi.n)
    throw DimensionMismatch("measure_serial: vector length does not match matrix");
  Eigen::VectorXd y(phi.m);
  const Eigen::MatrixXd& a = phi.data;
  for (Eigen::Index i = 0; i < phi.m; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < phi.n; ++j) acc += a(i, j) * z(j);
    y(i) = acc;
  }
  if (flops) *flops += 2ull * std::uint64_t(phi.m) * std::uint64_t(phi.n);
  return y;
}

}  // namespace reference

}  // namespace mpcc
