// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/pipelines.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mpcc/cloudstore.hpp"
#include "mpcc/errors.hpp"
#include "mpcc/parallel.hpp"
#include "mpcc/transform.hpp"

namespace mpcc {

namespace {

CiphertextRecord record_from_cipher(const CipherBlock& cipher, std::uint32_t n,
                                    std::uint64_t phi_seed) {
  CiphertextRecord rec;
  rec.flags = std::uint8_t((cipher.sensitive ? kFlagSensitive : 0) |
                           (cipher.transform_mode ? kFlagTransformMode : 0));
  rec.index = cipher.index;
  rec.m = std::uint32_t(cipher.measurements.size());
  rec.n = n;
  rec.phi_seed = phi_seed;
  rec.payload.assign(cipher.measurements.data(),
                     cipher.measurements.data() + cipher.measurements.size());
  return rec;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SmartMeterResult run_smartmeter(const SmartMeterConfig& config) {
  if (config.m < 1 || config.m > config.n)
    throw BadDimensions("run_smartmeter: need 1 <= m <= n");

  std::vector<MeterFrame> frames =
      config.csv_path.empty()
          ? synthetic_frames(config.frames, config.synthetic_seed, config.n, config.apartments)
          : ingest_meter_csv(config.csv_path, config.n, config.apartments);
  if (frames.empty()) throw DatasetMissing("run_smartmeter: no frames to process");

  ensure_dir(config.out_dir);
  const std::filesystem::path log_path =
      config.out_dir.empty()
          ? std::filesystem::temp_directory_path() /
                ("mpcc_meter_" + std::to_string(::getpid()) + ".log")
          : std::filesystem::path(config.out_dir) / "meter.log";
  std::filesystem::remove(log_path);  // each run starts from a clean store

  SubKeys keys = derive_subkeys(config.master);
  SensingMatrix phi = gen_sensing_matrix(config.phi_seed, config.m, config.n);
  CloudStore store(log_path.string());

  // Device side: encrypt and upload every frame.
  for (const MeterFrame& frame : frames) {
    PlainBlock block;
    block.values = frame.readings;
    block.index = frame.slot;
    block.kind = BlockKind::CanonicalSparse;
    CipherBlock cipher = enc_block(keys, phi, block, nullptr, config.t);
    store.put_record(record_from_cipher(cipher, std::uint32_t(config.n), config.phi_seed));
  }

  // Consumer side: decompress at the store, then decrypt per class.
  SmartMeterResult result;
  result.rows.resize(frames.size());
  std::vector<Eigen::VectorXd> super_values(frames.size()), semi_values(frames.size()),
      cloud_values(frames.size());

  parallel_for(
      frames.size(),
      [&](std::size_t f) {
        const MeterFrame& frame = frames[f];
        DecompressedBlock z = store.get_decompressed(frame.slot, config.solver);
        PlainBlock super_block = dec_super(keys, z, nullptr, true, config.t);
        PlainBlock semi_block = dec_semi(keys.k_r, z, nullptr, true, config.t);

        SmartMeterFrameRow row;
        row.index = frame.slot;
        row.converged = z.converged;

        BlockStats true_stats = permuted_stats(frame.readings);
        BlockStats semi_stats = permuted_stats(semi_block.values);
        row.true_mean = true_stats.mean;
        row.true_variance = true_stats.variance;
        row.semi_mean = semi_stats.mean;
        row.semi_variance = semi_stats.variance;
        row.cloud_mean = z.z.mean();
        row.super_mean = super_block.values.mean();

        const double denom = frame.readings.norm();
        row.rel_err_super =
            denom > 0 ? (super_block.values - frame.readings).norm() / denom : 0.0;
        row.exact = row.rel_err_super < 1e-3;
        row.cloud_deviates =
            std::abs(row.cloud_mean - row.true_mean) > 0.5 * std::abs(row.true_mean);

        result.rows[f] = row;
        super_values[f] = std::move(super_block.values);
        semi_values[f] = std::move(semi_block.values);
        cloud_values[f] = std::move(z.z);
      },
      config.threads);

  for (const auto& row : result.rows) {
    result.exact_count += row.exact ? 1 : 0;
    result.deviating_count += row.cloud_deviates ? 1 : 0;
    result.not_converged += row.converged ? 0 : 1;
  }

  if (!config.out_dir.empty()) {
    std::ofstream means(std::filesystem::path(config.out_dir) / "means.csv");
    means << "frame,true_mean,cloud_mean,semi_mean,super_mean,true_variance,semi_variance,"
             "rel_err_super,converged\n";
    for (const auto& row : result.rows) {
      means << row.index << ',' << csv_num(row.true_mean) << ',' << csv_num(row.cloud_mean)
            << ',' << csv_num(row.semi_mean) << ',' << csv_num(row.super_mean) << ','
            << csv_num(row.true_variance) << ',' << csv_num(row.semi_variance) << ','
            << csv_num(row.rel_err_super) << ',' << (row.converged ? 1 : 0) << '\n';
    }

    std::ofstream traces(std::filesystem::path(config.out_dir) / "traces.csv");
    traces << "frame,position,original,cloud,semi,super\n";
    for (std::size_t f = 0; f < frames.size(); ++f)
      for (Eigen::Index i = 0; i < config.n; ++i)
        traces << frames[f].slot << ',' << i << ',' << csv_num(frames[f].readings(i)) << ','
               << csv_num(cloud_values[f](i)) << ',' << csv_num(semi_values[f](i)) << ','
               << csv_num(super_values[f](i)) << '\n';
  }
  return result;
}

ImageResult run_image(const ImageConfig& config) {
  Image original = load_pgm(config.image_path);
  if (config.block < 1 || original.width % config.block != 0 ||
      original.height % config.block != 0)
    throw BadDimensions("run_image: image dimensions must divide by block size");
  if (config.rates.empty()) throw BadArgs("run_image: no sampling rates given");

  const Eigen::Index n = Eigen::Index(config.block) * config.block;
  std::vector<Eigen::VectorXd> blocks = extract_blocks(original, config.block);

  OrthoBasis basis;
  if (!config.basis_path.empty()) {
    basis = load_basis(config.basis_path);
    if (basis.size() != n) throw DimensionMismatch("run_image: loaded basis wrong size");
  } else if (!config.train_image_path.empty() &&
             config.train_image_path != config.image_path) {
    Image train = load_pgm(config.train_image_path);
    basis = klt_train(extract_blocks(train, config.block));
  } else {
    basis = klt_train(blocks);
  }

  SubKeys keys = derive_subkeys(config.master);
  ensure_dir(config.out_dir);

  ImageResult result;
  for (std::size_t rate_idx = 0; rate_idx < config.rates.size(); ++rate_idx) {
    const double rate = config.rates[rate_idx];
    const Eigen::Index m = std::clamp<Eigen::Index>(
        Eigen::Index(std::llround(rate * double(n))), 1, n);
    const std::uint64_t phi_seed = config.phi_seed + rate_idx;
    SensingMatrix phi = gen_sensing_matrix(phi_seed, m, n);

    const std::string log_path =
        (config.out_dir.empty()
             ? std::filesystem::temp_directory_path() /
                   ("mpcc_image_" + std::to_string(::getpid()) + "_" +
                    std::to_string(rate_idx) + ".log")
             : std::filesystem::path(config.out_dir) /
                   ("store_rate" + std::to_string(rate_idx) + ".log"))
            .string();
    std::filesystem::remove(log_path);
    CloudStore store(log_path);

    // Device side.
    std::vector<CipherBlock> ciphers(blocks.size());
    parallel_for(
        blocks.size(),
        [&](std::size_t b) {
          PlainBlock block;
          block.values = blocks[b];
          block.index = std::uint64_t(b);
          block.kind = BlockKind::TransformSparse;
          block.sensitive =
              block_intersects(int(b), original.width, config.block, config.sensitive);
          ciphers[b] = enc_block(keys, phi, block, &basis, config.t);
        },
        config.threads);
    for (const CipherBlock& cipher : ciphers)
      store.put_record(record_from_cipher(cipher, std::uint32_t(n), phi_seed));

    // Store + consumer side.
    std::vector<Eigen::VectorXd> cloud_blocks(blocks.size()), semi_blocks(blocks.size()),
        super_blocks(blocks.size());
    std::vector<int> unconverged(blocks.size(), 0);
    parallel_for(
        blocks.size(),
        [&](std::size_t b) {
          SolverOptions opts = config.solver;
          CiphertextRecord rec = store.get_raw(std::uint64_t(b));
          Eigen::Map<const Eigen::VectorXd> y(rec.payload.data(),
                                              Eigen::Index(rec.payload.size()));
          opts.epsilon = config.epsilon_rel * y.norm();
          DecompressedBlock z = store.get_decompressed(std::uint64_t(b), opts);
          unconverged[b] = z.converged ? 0 : 1;

          const bool sensitive = rec.sensitive();
          PlainBlock super_block = dec_super(keys, z, &basis, sensitive, config.t);
          PlainBlock semi_block = dec_semi(keys.k_r, z, &basis, sensitive, config.t);
          cloud_blocks[b] = std::move(z.z);
          semi_blocks[b] = std::move(semi_block.values);
          super_blocks[b] = std::move(super_block.values);
        },
        config.threads);

    RateImages images;
    images.rate = rate;
    images.cloud = assemble_blocks(cloud_blocks, original.width, original.height, config.block);
    images.semi = assemble_blocks(semi_blocks, original.width, original.height, config.block);
    images.super = assemble_blocks(super_blocks, original.width, original.height, config.block);

    RatePsnrRow row;
    row.rate = rate;
    row.m = m;
    row.super_complete = psnr(original, images.super);
    row.semi_complete = psnr(original, images.semi);
    row.cloud_complete = psnr(original, images.cloud);
    if (!config.sensitive.empty()) {
      row.super_sensitive = psnr_region(original, images.super, config.sensitive);
      row.semi_sensitive = psnr_region(original, images.semi, config.sensitive);
    }
    for (int flag : unconverged) row.not_converged += flag;

    if (!config.out_dir.empty()) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "rate%.2f", rate);
      const auto dir = std::filesystem::path(config.out_dir);
      save_pgm(images.cloud, (dir / (std::string("cloud_") + tag + ".pgm")).string());
      save_pgm(images.semi, (dir / (std::string("semi_") + tag + ".pgm")).string());
      save_pgm(images.super, (dir / (std::string("super_") + tag + ".pgm")).string());
    }

    result.rows.push_back(row);
    result.images.push_back(std::move(images));
  }

  if (!config.out_dir.empty()) {
    std::ofstream csv(std::filesystem::path(config.out_dir) / "psnr.csv");
    csv << "rate,m,psnr_super_complete,psnr_super_sensitive,psnr_semi_complete,"
           "psnr_semi_sensitive,psnr_cloud_complete,not_converged\n";
    for (const auto& row : result.rows) {
      csv << csv_num(row.rate) << ',' << row.m << ',' << csv_num(psnr_capped(row.super_complete))
          << ',' << csv_num(psnr_capped(row.super_sensitive)) << ','
          << csv_num(psnr_capped(row.semi_complete)) << ','
          << csv_num(psnr_capped(row.semi_sensitive)) << ','
          << csv_num(psnr_capped(row.cloud_complete)) << ',' << row.not_converged << '\n';
    }
  }
  return result;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw BadArgs("r_squared: need two equal-length samples of size >= 2");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = n * sxy - sx * sy;
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  if (vx == 0.0 || vy == 0.0) return 1.0;  // degenerate: all points identical in one axis
  return (cov * cov) / (vx * vy);
}

}  // namespace mpcc
