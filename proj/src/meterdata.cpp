// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/meterdata.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mpcc/errors.hpp"

namespace mpcc {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding spaces
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

std::vector<MeterFrame> ingest_meter_csv(const std::string& path, Eigen::Index n,
                                         int apartments) {
  if (apartments < 1 || Eigen::Index(apartments) > n)
    throw BadArgs("ingest_meter_csv: need 1 <= apartments <= n");
  std::ifstream in(path);
  if (!in) throw DatasetMissing("cannot open meter CSV: " + path);

  std::vector<MeterFrame> frames;
  std::string line;
  std::size_t row = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split_csv_row(line);

    if (first_data_row) {
      // A row whose first non-empty cell is not numeric is a header.
      double probe;
      bool numeric = false;
      for (const auto& c : cells)
        if (!c.empty()) {
          numeric = parse_double(c, probe);
          break;
        }
      first_data_row = false;
      if (!numeric) continue;
    }

    if (int(cells.size()) < apartments)
      throw ParseError("meter CSV row " + std::to_string(row) + ": expected at least " +
                       std::to_string(apartments) + " columns, got " +
                       std::to_string(cells.size()));

    MeterFrame frame;
    frame.slot = frames.size();
    frame.readings = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < apartments; ++col) {
      const std::string& cell = cells[std::size_t(col)];
      if (cell.empty()) {
        std::fprintf(stderr, "warning: meter CSV row %zu column %d empty, using 0\n", row,
                     col + 1);
        continue;
      }
      double v;
      if (!parse_double(cell, v))
        throw ParseError("meter CSV row " + std::to_string(row) + " column " +
                         std::to_string(col + 1) + ": not a number: '" + cell + "'");
      frame.readings(col) = v;
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<MeterFrame> synthetic_frames(int count, std::uint64_t seed, Eigen::Index n,
                                         int apartments, double mu, double sigma) {
  if (count < 0) throw BadArgs("synthetic_frames: count must be >= 0");
  if (apartments < 1 || Eigen::Index(apartments) > n)
    throw BadArgs("synthetic_frames: need 1 <= apartments <= n");
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(mu, sigma);
  std::vector<MeterFrame> frames;
  frames.reserve(std::size_t(count));
  for (int f = 0; f < count; ++f) {
    MeterFrame frame;
    frame.slot = std::uint64_t(f);
    frame.readings = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < apartments; ++a) frame.readings(a) = dist(rng);
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace mpcc
