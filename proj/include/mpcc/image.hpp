// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal grayscale image support: binary PGM (P5, maxval 255) in/out,
// square block (de)tiling, and PSNR.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace mpcc {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  std::uint8_t& at(int x, int y) { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
};

Image load_pgm(const std::string& path);
void save_pgm(const Image& img, const std::string& path);

// Raster-ordered square tiles, each flattened row-major into a vector of
// length block * block. Image dimensions must divide evenly.
std::vector<Eigen::VectorXd> extract_blocks(const Image& img, int block);

// Inverse of extract_blocks; values are rounded and clamped to [0, 255].
Image assemble_blocks(const std::vector<Eigen::VectorXd>& blocks, int width, int height,
                      int block);

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool empty() const { return w <= 0 || h <= 0; }
};

// True when tile `block_idx` (raster order) overlaps the rectangle.
bool block_intersects(int block_idx, int image_width, int block, const Rect& rect);

// 10 log10(255^2 / MSE); infinity when the images are identical.
double psnr(const Image& a, const Image& b);
// Same region restricted to a rectangle (clipped to the image bounds).
double psnr_region(const Image& a, const Image& b, const Rect& rect);
// Table form: finite values pass through, infinity caps at 99.99 dB.
double psnr_capped(double value);

// Deterministic grayscale scene for block-coding experiments: a smooth
// sinusoidal background plus a stationary texture synthesized per 32x32
// tile from orthonormal 2D cosine modes with exponentially decaying
// amplitudes and per-tile pseudo-random mode weights. Identical
// (width, height, seed) reproduce the same pixels; a larger canvas
// extends a smaller one at equal seed; different seeds are independent
// draws from the same ensemble, so any two scenes share second-order
// block statistics. Dimensions must be positive multiples of 32.
Image synthetic_scene(int width, int height, std::uint64_t seed);

}  // namespace mpcc
