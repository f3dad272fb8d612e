// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mpcc {

// Thread count resolution: explicit request > MPCC_THREADS env > OpenMP default.
// A request of 1 (or a build without OpenMP) gives the serial path, which
// produces bit-identical results to the parallel one: every loop body is a
// pure function of its index.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MPCC_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename F>
void parallel_for(std::size_t n, F&& body, int threads = 0) {
  const int t = resolve_threads(threads);
#ifdef _OPENMP
  if (t > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(t)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      body(static_cast<std::size_t>(i));
    return;
  }
#endif
  (void)t;
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace mpcc
