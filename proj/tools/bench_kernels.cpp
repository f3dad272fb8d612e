// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark for the measurement kernel: serial reference vs the OpenMP
// row-parallel version. Both paths must produce bit-identical output because
// each row accumulates in a fixed order; the check here enforces that while
// timing both.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "mpcc/parallel.hpp"
#include "mpcc/sensing.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Shape {
  Eigen::Index m, n;
};

}  // namespace

int main(int argc, char** argv) {
  int repeats = 20;
  int threads = 0;  // 0 = resolve from MPCC_THREADS / OpenMP default
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--repeats") == 0 && i + 1 < argc)
      repeats = std::atoi(argv[++i]);
    else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: %s [--repeats N] [--threads T]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Shape> shapes = {
      {64, 256}, {128, 512}, {256, 1024}, {512, 2048}, {1024, 4096}};

  std::printf("measurement kernel y = Phi z, %d repeats, %d threads requested\n", repeats,
              threads);
  std::printf("%8s %8s %12s %12s %9s %12s %s\n", "m", "n", "serial_ms", "parallel_ms",
              "speedup", "gflops_par", "bitwise");

  bool all_identical = true;
  for (const Shape& s : shapes) {
    mpcc::SensingMatrix phi = mpcc::gen_sensing_matrix(42, s.m, s.n);
    Eigen::VectorXd z(s.n);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (Eigen::Index i = 0; i < s.n; ++i) {
      // xorshift fill, deterministic and cheap
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      z(i) = double(state >> 11) * 0x1.0p-53 - 0.5;
    }

    Eigen::VectorXd y_serial, y_parallel;
    std::uint64_t flops = 0;

    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) y_serial = mpcc::reference::measure_serial(phi, z, &flops);
    const double serial_s = seconds_since(t0) / repeats;

    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) y_parallel = mpcc::measure(phi, z, threads);
    const double parallel_s = seconds_since(t0) / repeats;

    const bool identical =
        std::memcmp(y_serial.data(), y_parallel.data(), sizeof(double) * std::size_t(s.m)) == 0;
    all_identical = all_identical && identical;

    const double gflops = double(2 * s.m * s.n) / parallel_s * 1e-9;
    std::printf("%8lld %8lld %12.4f %12.4f %8.2fx %12.2f %s\n", (long long)s.m, (long long)s.n,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, gflops,
                identical ? "identical" : "DIVERGED");
  }

  if (!all_identical) {
    std::fprintf(stderr, "parallel output diverged from the serial reference\n");
    return 1;
  }
  return 0;
}
