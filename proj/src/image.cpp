// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <utility>

#include "mpcc/errors.hpp"

namespace mpcc {

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(char(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(char(c));
  return tok;
}

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadImage("cannot open image: " + path);
  if (next_token(in) != "P5") throw BadImage("not a binary PGM (P5): " + path);

  auto parse_dim = [&](const char* what) {
    std::string tok = next_token(in);
    if (tok.empty()) throw BadImage(std::string("truncated PGM header: ") + what);
    for (char ch : tok)
      if (!std::isdigit(static_cast<unsigned char>(ch)))
        throw BadImage(std::string("bad PGM ") + what + ": " + tok);
    long v = std::stol(tok);
    if (v < 1 || v > 1 << 20) throw BadImage(std::string("unreasonable PGM ") + what);
    return int(v);
  };

  Image img;
  img.width = parse_dim("width");
  img.height = parse_dim("height");
  const int maxval = parse_dim("maxval");
  if (maxval != 255) throw BadImage("only maxval 255 PGM supported");

  // The header ends with exactly one whitespace byte (already consumed by
  // next_token); raw samples follow.
  img.pixels.resize(std::size_t(img.width) * std::size_t(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (std::size_t(in.gcount()) != img.pixels.size())
    throw BadImage("truncated PGM pixel data: " + path);
  return img;
}

void save_pgm(const Image& img, const std::string& path) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != std::size_t(img.width) * std::size_t(img.height))
    throw BadImage("save_pgm: inconsistent image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BadImage("save_pgm: cannot open " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
  if (!out) throw BadImage("save_pgm: short write to " + path);
}

std::vector<Eigen::VectorXd> extract_blocks(const Image& img, int block) {
  if (block < 1 || img.width % block != 0 || img.height % block != 0)
    throw BadDimensions("extract_blocks: image dimensions must divide by block size");
  const int bx = img.width / block;
  const int by = img.height / block;
  std::vector<Eigen::VectorXd> blocks;
  blocks.reserve(std::size_t(bx) * std::size_t(by));
  for (int ty = 0; ty < by; ++ty)
    for (int tx = 0; tx < bx; ++tx) {
      Eigen::VectorXd v(block * block);
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x)
          v(y * block + x) = double(img.at(tx * block + x, ty * block + y));
      blocks.push_back(std::move(v));
    }
  return blocks;
}

Image assemble_blocks(const std::vector<Eigen::VectorXd>& blocks, int width, int height,
                      int block) {
  if (block < 1 || width % block != 0 || height % block != 0)
    throw BadDimensions("assemble_blocks: dimensions must divide by block size");
  const int bx = width / block;
  const int by = height / block;
  if (blocks.size() != std::size_t(bx) * std::size_t(by))
    throw BadDimensions("assemble_blocks: wrong number of blocks");

  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t(width) * std::size_t(height));
  for (int ty = 0; ty < by; ++ty)
    for (int tx = 0; tx < bx; ++tx) {
      const Eigen::VectorXd& v = blocks[std::size_t(ty) * std::size_t(bx) + std::size_t(tx)];
      if (v.size() != block * block)
        throw BadDimensions("assemble_blocks: block length mismatch");
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x) {
          double val = std::round(v(y * block + x));
          val = std::clamp(val, 0.0, 255.0);
          img.at(tx * block + x, ty * block + y) = std::uint8_t(val);
        }
    }
  return img;
}

bool block_intersects(int block_idx, int image_width, int block, const Rect& rect) {
  if (rect.empty()) return false;
  const int bx = image_width / block;
  const int tx = (block_idx % bx) * block;
  const int ty = (block_idx / bx) * block;
  return tx < rect.x + rect.w && tx + block > rect.x && ty < rect.y + rect.h &&
         ty + block > rect.y;
}

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch("psnr: image sizes differ");
  Rect all{0, 0, a.width, a.height};
  return psnr_region(a, b, all);
}

double psnr_region(const Image& a, const Image& b, const Rect& rect) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch("psnr: image sizes differ");
  const int x0 = std::max(0, rect.x);
  const int y0 = std::max(0, rect.y);
  const int x1 = std::min(a.width, rect.x + rect.w);
  const int y1 = std::min(a.height, rect.y + rect.h);
  if (x0 >= x1 || y0 >= y1) throw BadDimensions("psnr_region: empty region");

  double sum = 0.0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const double d = double(a.at(x, y)) - double(b.at(x, y));
      sum += d * d;
    }
  const double mse = sum / (double(x1 - x0) * double(y1 - y0));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double psnr_capped(double value) { return std::min(value, 99.99); }

namespace {

constexpr int kSceneTile = 32;
constexpr int kSceneModes = 450;

// SplitMix64 finalizer; decorrelates per-tile generator seeds.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Same Gaussian draw discipline as the sensing-matrix generator: pairs
// via Box-Muller over (0, 1] uniforms built from the top 53 bits.
class TileGaussian {
 public:
  explicit TileGaussian(std::uint64_t seed) : rng_(seed) {}

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
    const std::uint64_t x = rng_();
    return double((x >> 11) + 1) * 0x1p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

Image synthetic_scene(int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1 || width % kSceneTile != 0 || height % kSceneTile != 0)
    throw BadArgs("synthetic_scene: dimensions must be positive multiples of 32");

  // Orthonormal DCT-II rows: basis[p][u] = c_p cos(pi (2u+1) p / 64).
  Eigen::Matrix<double, kSceneTile, kSceneTile> basis;
  for (int p = 0; p < kSceneTile; ++p) {
    const double c = std::sqrt((p == 0 ? 1.0 : 2.0) / double(kSceneTile));
    for (int u = 0; u < kSceneTile; ++u)
      basis(p, u) = c * std::cos(M_PI * (2.0 * u + 1.0) * p / (2.0 * kSceneTile));
  }

  // Mode frequencies in zigzag (diagonal) order, DC excluded. Mode k
  // carries amplitude 70 exp(-k/80), so the texture's sorted coefficient
  // energies form a smooth exponential ladder.
  std::vector<std::pair<int, int>> modes;
  modes.reserve(kSceneModes);
  for (int s = 1; s < 2 * kSceneTile - 1 && int(modes.size()) < kSceneModes; ++s)
    for (int p = std::max(0, s - (kSceneTile - 1));
         p <= std::min(s, kSceneTile - 1) && int(modes.size()) < kSceneModes; ++p)
      modes.emplace_back(p, s - p);
  std::vector<double> amplitude(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k)
    amplitude[k] = 70.0 * std::exp(-double(k) / 80.0);

  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t(width) * std::size_t(height));

  const int tiles_x = width / kSceneTile;
  const int tiles_y = height / kSceneTile;
  Eigen::Matrix<double, kSceneTile, kSceneTile> coeff, patch;
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      TileGaussian gauss(
          mix64(seed ^ mix64((std::uint64_t(std::uint32_t(ty)) << 32) | std::uint32_t(tx))));
      coeff.setZero();
      for (std::size_t k = 0; k < modes.size(); ++k)
        coeff(modes[k].first, modes[k].second) = amplitude[k] * gauss.next();
      patch = basis.transpose() * coeff * basis;

      for (int v = 0; v < kSceneTile; ++v) {
        const int y = ty * kSceneTile + v;
        for (int u = 0; u < kSceneTile; ++u) {
          const int x = tx * kSceneTile + u;
          const double background = 118.0 + 40.0 * std::sin(2.0 * M_PI * x / 512.0 + 0.9) +
                                    30.0 * std::cos(2.0 * M_PI * y / 512.0 - 0.4) +
                                    20.0 * std::sin(2.0 * M_PI * (x + y) / 128.0) +
                                    20.0 * std::sin(2.0 * M_PI * x / 96.0 + 1.7) *
                                        std::cos(2.0 * M_PI * y / 160.0 - 0.5);
          const double value = std::round(background + patch(v, u));
          img.at(x, y) = std::uint8_t(std::clamp(value, 0.0, 255.0));
        }
      }
    }
  }
  return img;
}

}  // namespace mpcc
