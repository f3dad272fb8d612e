// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end desk-scale experiments. Both pipelines drive the full loop:
// encode at the device, persist at the store, decompress at the store,
// decrypt at both consumer classes, and compare what each party sees.
// Every run is deterministic given (master key, sensing seed, dataset,
// config); artifacts are CSV files plus PGM images, written in index order
// regardless of how blocks were scheduled.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mpcc/codec.hpp"
#include "mpcc/image.hpp"
#include "mpcc/keyschedule.hpp"
#include "mpcc/meterdata.hpp"
#include "mpcc/recovery.hpp"

namespace mpcc {

struct SmartMeterConfig {
  MasterKey master;
  std::uint64_t phi_seed = 1;
  Eigen::Index n = 512;
  int apartments = 70;
  Eigen::Index m = 256;
  // Mask level count. A larger level set than the encoder default widens the
  // spread of the stored vector relative to the frame mean, which is what
  // keeps the cloud's mean estimate uninformative on heavy-tailed frames;
  // exact sparse recovery is magnitude-invariant, so accuracy is unaffected.
  int t = 64;
  int frames = 50;                    // synthetic frame count when csv_path empty
  std::uint64_t synthetic_seed = 2026;
  std::string csv_path;               // non-empty: ingest instead of synthesizing
  std::string out_dir;                // non-empty: write traces.csv / means.csv / meter.log
  SolverOptions solver;
  int threads = 0;
};

struct SmartMeterFrameRow {
  std::uint64_t index = 0;
  double true_mean = 0, cloud_mean = 0, semi_mean = 0, super_mean = 0;
  double true_variance = 0, semi_variance = 0;
  double rel_err_super = 0;  // ||super - original||_2 / ||original||_2
  bool converged = false;
  bool exact = false;           // rel_err_super < 1e-3
  bool cloud_deviates = false;  // |cloud_mean - true_mean| > 0.5 |true_mean|
};

struct SmartMeterResult {
  std::vector<SmartMeterFrameRow> rows;
  int exact_count = 0;
  int deviating_count = 0;
  int not_converged = 0;
};

SmartMeterResult run_smartmeter(const SmartMeterConfig& config);

struct ImageConfig {
  MasterKey master;
  std::uint64_t phi_seed = 7;
  std::string image_path;
  std::string train_image_path;  // empty: train the basis on the input image
  std::string basis_path;        // non-empty: load a saved basis instead
  int block = 32;
  std::vector<double> rates = {0.2, 0.3, 0.4, 0.5};
  Rect sensitive;
  int t = 16;
  std::string out_dir;  // non-empty: write per-rate images and psnr.csv
  SolverOptions solver;
  // Per-block residual budget: epsilon = epsilon_rel * ||y||_2 (coefficient
  // blocks are compressible rather than exactly sparse).
  double epsilon_rel = 1e-6;
  int threads = 0;
};

struct RatePsnrRow {
  double rate = 0;
  Eigen::Index m = 0;
  double super_complete = 0, super_sensitive = 0;
  double semi_complete = 0, semi_sensitive = 0;
  double cloud_complete = 0;
  int not_converged = 0;
};

struct RateImages {
  double rate = 0;
  Image cloud, semi, super;
};

struct ImageResult {
  std::vector<RatePsnrRow> rows;
  std::vector<RateImages> images;
};

ImageResult run_image(const ImageConfig& config);

// R^2 of an ordinary least-squares line fit on (x, y); 1.0 means perfectly
// linear. Used for cost-scaling checks.
double r_squared(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mpcc
