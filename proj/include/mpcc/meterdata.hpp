// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Smart-meter frames: sparse length-n vectors whose first k positions hold
// per-apartment readings (one column per apartment, one CSV row per
// 15-minute slot). A seeded synthetic generator stands in when no dataset
// is available.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace mpcc {

struct MeterFrame {
  Eigen::VectorXd readings;  // length n, at most k nonzeros (positions 0..k-1)
  std::uint64_t slot = 0;
};

// CSV ingestion: each row is one frame; the first `apartments` numeric
// columns map to vector positions 0..apartments-1. A non-numeric first row
// is treated as a header. Empty cells become 0 with a warning on stderr;
// any other non-numeric cell raises ParseError naming the row and column.
std::vector<MeterFrame> ingest_meter_csv(const std::string& path, Eigen::Index n = 512,
                                         int apartments = 70);

// Deterministic synthetic readings: log-normal(mu, sigma) per apartment,
// mt19937_64 seeded with `seed`, one frame's k draws consumed in position
// order. The heavy tail (sigma = 2) mirrors highly uneven household loads
// and gives the frames a small mean-to-energy ratio.
std::vector<MeterFrame> synthetic_frames(int count, std::uint64_t seed, Eigen::Index n = 512,
                                         int apartments = 70, double mu = -0.6931471805599453,
                                         double sigma = 2.0);

}  // namespace mpcc
