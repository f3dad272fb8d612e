// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: key management, single-block encode/decode, the
// storage server and its query client, the two end-to-end experiment
// pipelines, and the security accounting bench.
#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mpcc/bytes.hpp"
#include "mpcc/cloudstore.hpp"
#include "mpcc/codec.hpp"
#include "mpcc/errors.hpp"
#include "mpcc/image.hpp"
#include "mpcc/keyschedule.hpp"
#include "mpcc/pipelines.hpp"
#include "mpcc/securitybench.hpp"
#include "mpcc/transform.hpp"

namespace {

using namespace mpcc;

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

MasterKey key_from_cli(const std::string& key_path) {
  if (!key_path.empty()) return load_master_key_file(key_path);
  return load_master_key_env();  // MPCC_MASTER_KEY
}

Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file: " + path);
  std::vector<double> values;
  std::string tok;
  while (in >> tok) {
    // commas are separators too
    std::stringstream cell(tok);
    std::string piece;
    while (std::getline(cell, piece, ',')) {
      if (piece.empty()) continue;
      char* end = nullptr;
      double v = std::strtod(piece.c_str(), &end);
      if (end != piece.c_str() + piece.size())
        throw ParseError("vector file " + path + ": not a number: '" + piece + "'");
      values.push_back(v);
    }
  }
  Eigen::VectorXd out(Eigen::Index(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(Eigen::Index(i)) = values[i];
  return out;
}

void write_vector(const std::string& path, const Eigen::VectorXd& v) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!path.empty() && path != "-") {
    file.open(path, std::ios::trunc);
    if (!file) throw ParseError("cannot open output file: " + path);
    out = &file;
  }
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v(i));
    *out << buf;
  }
}

Rect parse_rect(const std::string& spec) {
  Rect r;
  if (spec.empty()) return r;
  if (std::sscanf(spec.c_str(), "%d,%d,%d,%d", &r.x, &r.y, &r.w, &r.h) != 4)
    throw BadArgs("rectangle must be x,y,w,h: " + spec);
  return r;
}

void split_host_port(const std::string& addr, std::string& host, std::uint16_t& port) {
  auto pos = addr.rfind(':');
  if (pos == std::string::npos) throw BadArgs("address must be host:port: " + addr);
  host = addr.substr(0, pos);
  long p = std::strtol(addr.c_str() + pos + 1, nullptr, 10);
  if (p < 0 || p > 65535) throw BadArgs("port out of range: " + addr);
  port = std::uint16_t(p);
}

void add_solver_flags(CLI::App* cmd, SolverOptions& opts) {
  cmd->add_option("--epsilon", opts.epsilon, "residual budget (0 = equality constraint)");
  cmd->add_option("--max-iters", opts.max_iters, "solver iteration cap");
  cmd->add_option("--rho", opts.rho, "splitting penalty");
  cmd->add_option("--abs-tol", opts.abs_tol, "absolute stopping tolerance");
  cmd->add_option("--rel-tol", opts.rel_tol, "relative stopping tolerance");
  cmd->add_flag("--debias,!--no-debias", opts.debias, "least-squares refit on the support");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"compressive-sensing encryption with multi-class decryption"};
  app.set_config("--config", "", "plain key=value config file; flags override it");
  app.require_subcommand(1);

  std::string key_path;
  app.add_option("--key", key_path,
                 "master key file (64 hex chars); falls back to $MPCC_MASTER_KEY")
      ->envname("MPCC_KEY_FILE");

  // keygen
  auto* keygen = app.add_subcommand("keygen", "generate a master key file");
  std::string keygen_out = "master.key";
  keygen->add_option("--out", keygen_out, "output key file (mode 0600)");

  // encode
  auto* encode = app.add_subcommand("encode", "encrypt one block into a ciphertext record");
  std::string enc_in, enc_out = "record.bin", enc_basis;
  std::uint64_t enc_index = 0, enc_phi_seed = 1;
  std::int64_t enc_m = 0;
  int enc_levels = 16;
  bool enc_sensitive = true;
  encode->add_option("--in", enc_in, "plaintext vector file (whitespace/comma numbers)")
      ->required();
  encode->add_option("--out", enc_out, "record output path");
  encode->add_option("--m", enc_m, "measurement count")->required();
  encode->add_option("--index", enc_index, "block index");
  encode->add_option("--phi-seed", enc_phi_seed, "public sensing seed");
  encode->add_option("--levels", enc_levels, "mask levels t (mask entries are +/-1..t)");
  encode->add_option("--basis", enc_basis, "basis file: encode transform coefficients");
  encode->add_flag("--sensitive,!--not-sensitive", enc_sensitive,
                   "permute the block (transform mode only; canonical always permutes)");

  // serve
  auto* serve = app.add_subcommand("serve", "serve a record log over TCP");
  std::string serve_log, serve_listen = "127.0.0.1:7700";
  SolverOptions serve_opts;
  serve->add_option("--log", serve_log, "record log path")->required();
  serve->add_option("--listen", serve_listen, "listen address host:port");
  add_solver_flags(serve, serve_opts);

  // query
  auto* query = app.add_subcommand("query", "query a running server");
  std::string query_connect = "127.0.0.1:7700", query_op = "fetch-decompressed",
              query_out = "-";
  std::uint64_t query_index = 0;
  query->add_option("--connect", query_connect, "server address host:port");
  query->add_option("--op", query_op, "fetch-decompressed | fetch-raw | stat-count");
  query->add_option("--index", query_index, "block index");
  query->add_option("--out", query_out, "payload output file ('-' = stdout)");

  // decode-super / decode-semi
  auto* dsuper = app.add_subcommand("decode-super", "decrypt with both class keys");
  auto* dsemi = app.add_subcommand("decode-semi", "decrypt with the mask key only");
  std::string dec_in, dec_out = "-", dec_basis;
  std::uint64_t dec_index = 0;
  int dec_levels = 16;
  bool dec_sensitive = true;
  for (CLI::App* cmd : {dsuper, dsemi}) {
    cmd->add_option("--in", dec_in, "decompressed vector file (from query)")->required();
    cmd->add_option("--out", dec_out, "plaintext output file ('-' = stdout)");
    cmd->add_option("--index", dec_index, "block index used at encode time");
    cmd->add_option("--levels", dec_levels, "mask levels t used at encode time");
    cmd->add_option("--basis", dec_basis, "basis file for transform-mode blocks");
    cmd->add_flag("--sensitive,!--not-sensitive", dec_sensitive,
                  "block was encoded as sensitive");
  }

  // stats
  auto* stats = app.add_subcommand("stats", "order-invariant statistics of a vector");
  std::string stats_in;
  HistogramSpec stats_spec;
  stats->add_option("--in", stats_in, "vector file")->required();
  stats->add_option("--bins", stats_spec.bins, "histogram bin count");
  stats->add_option("--lo", stats_spec.lo, "histogram lower edge");
  stats->add_option("--hi", stats_spec.hi, "histogram upper edge (lo >= hi: from data)");

  // run-smartmeter
  auto* meter = app.add_subcommand("run-smartmeter", "meter-frame end-to-end experiment");
  SmartMeterConfig mcfg;
  int meter_frames = 50;
  meter->add_option("--csv", mcfg.csv_path, "meter readings CSV (default: synthetic)");
  meter->add_option("--synthetic,--frames", meter_frames, "synthetic frame count");
  meter->add_option("--out-dir", mcfg.out_dir, "artifact directory")->required();
  meter->add_option("--n", mcfg.n, "frame length");
  meter->add_option("--apartments", mcfg.apartments, "populated positions per frame");
  meter->add_option("--m", mcfg.m, "measurement count");
  meter->add_option("--levels", mcfg.t, "mask levels t");
  meter->add_option("--phi-seed", mcfg.phi_seed, "public sensing seed");
  meter->add_option("--seed", mcfg.synthetic_seed, "synthetic generator seed");
  meter->add_option("--threads", mcfg.threads, "worker threads (0 = auto)");
  add_solver_flags(meter, mcfg.solver);

  // run-image
  auto* image = app.add_subcommand("run-image", "block-image end-to-end experiment");
  ImageConfig icfg;
  std::string image_rates = "0.2,0.3,0.4,0.5", image_rect = "192,160,128,128";
  std::string save_basis_path;
  image->add_option("--image", icfg.image_path, "input grayscale PGM (P5)")->required();
  image->add_option("--out-dir", icfg.out_dir, "artifact directory")->required();
  image->add_option("--rates,--rate", image_rates, "comma-separated sampling rates");
  image->add_option("--blocksize", icfg.block, "square block edge");
  image->add_option("--sensitive-rect", image_rect, "sensitive region x,y,w,h ('' = none)");
  image->add_option("--levels", icfg.t, "mask levels t");
  image->add_option("--phi-seed", icfg.phi_seed, "public sensing seed base");
  image->add_option("--train-image", icfg.train_image_path,
                    "basis training image (default: the input image)");
  image->add_option("--basis", icfg.basis_path, "load a saved basis instead of training");
  image->add_option("--save-basis", save_basis_path, "also save the basis used");
  image->add_option("--epsilon-rel", icfg.epsilon_rel,
                    "per-block residual budget as a fraction of ||y||");
  image->add_option("--threads", icfg.threads, "worker threads (0 = auto)");
  add_solver_flags(image, icfg.solver);

  // psnr
  auto* psnr_cmd = app.add_subcommand("psnr", "peak signal-to-noise ratio of two images");
  std::string psnr_a, psnr_b, psnr_rect;
  psnr_cmd->add_option("--a", psnr_a, "reference image")->required();
  psnr_cmd->add_option("--b", psnr_b, "comparison image")->required();
  psnr_cmd->add_option("--rect", psnr_rect, "restrict to region x,y,w,h");

  // bench-security
  auto* bench = app.add_subcommand("bench-security", "security accounting checks");
  std::uint32_t bench_max_prime = 31;
  std::uint64_t bench_n = 256, bench_k = 30, bench_t = 16;
  std::string bench_csv_dir;
  bench->add_option("--max-prime", bench_max_prime, "verify secrecy for all primes <= this");
  bench->add_option("--n", bench_n, "block length for the counting table");
  bench->add_option("--k", bench_k, "sparsity for the counting table");
  bench->add_option("--levels", bench_t, "mask levels for the counting table");
  bench->add_option("--csv-dir", bench_csv_dir, "also write secrecy.csv and counts.csv here");

  CLI11_PARSE(app, argc, argv);

  if (keygen->parsed()) {
    MasterKey key = random_master_key();
    save_master_key_file(key, keygen_out);
    std::cout << "wrote " << keygen_out << " (mode 0600)\n";
    return 0;
  }

  if (encode->parsed()) {
    MasterKey master = key_from_cli(key_path);
    SubKeys keys = derive_subkeys(master);
    Eigen::VectorXd x = read_vector(enc_in);
    if (enc_m < 1 || enc_m > x.size())
      throw BadDimensions("encode: need 1 <= m <= vector length");
    SensingMatrix phi = gen_sensing_matrix(enc_phi_seed, enc_m, x.size());

    PlainBlock block;
    block.values = x;
    block.index = enc_index;
    block.sensitive = enc_sensitive;
    OrthoBasis basis;
    const OrthoBasis* basis_ptr = nullptr;
    if (!enc_basis.empty()) {
      basis = load_basis(enc_basis);
      basis_ptr = &basis;
      block.kind = BlockKind::TransformSparse;
    }
    CipherBlock cipher = enc_block(keys, phi, block, basis_ptr, enc_levels);

    CiphertextRecord rec;
    rec.flags = std::uint8_t((cipher.sensitive ? kFlagSensitive : 0) |
                             (cipher.transform_mode ? kFlagTransformMode : 0));
    rec.index = cipher.index;
    rec.m = std::uint32_t(cipher.measurements.size());
    rec.n = std::uint32_t(x.size());
    rec.phi_seed = enc_phi_seed;
    rec.payload.assign(cipher.measurements.data(),
                       cipher.measurements.data() + cipher.measurements.size());
    auto bytes = encode_record(rec);
    std::ofstream out(enc_out, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw ParseError("encode: cannot write " + enc_out);
    std::cout << "wrote " << enc_out << " (" << bytes.size() << " bytes, index " << rec.index
              << ")\n";
    return 0;
  }

  if (serve->parsed()) {
    std::string host;
    std::uint16_t port;
    split_host_port(serve_listen, host, port);
    CloudStore store(serve_log);
    StoreServer server(store, host, port, serve_opts);
    server.start();
    std::cout << "serving " << store.count() << " records on " << host << ":" << server.port()
              << std::endl;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cout << "stopped\n";
    return 0;
  }

  if (query->parsed()) {
    std::string host;
    std::uint16_t port;
    split_host_port(query_connect, host, port);
    std::uint8_t op;
    if (query_op == "fetch-decompressed")
      op = kOpFetchDecompressed;
    else if (query_op == "fetch-raw")
      op = kOpFetchRaw;
    else if (query_op == "stat-count")
      op = kOpStatCount;
    else
      throw BadArgs("unknown op: " + query_op);
    QueryReply reply = query_store(host, port, op, query_index);
    if (reply.status != ReplyStatus::Ok && reply.status != ReplyStatus::NotConverged) {
      std::cerr << "status " << int(reply.status) << " for index " << reply.index << "\n";
      return 2;
    }
    if (reply.status == ReplyStatus::NotConverged)
      std::cerr << "warning: solver did not fully converge; payload is best-effort\n";
    Eigen::VectorXd v(Eigen::Index(reply.payload.size()));
    for (std::size_t i = 0; i < reply.payload.size(); ++i)
      v(Eigen::Index(i)) = reply.payload[i];
    write_vector(query_out, v);
    return 0;
  }

  if (dsuper->parsed() || dsemi->parsed()) {
    MasterKey master = key_from_cli(key_path);
    SubKeys keys = derive_subkeys(master);
    DecompressedBlock block;
    block.z = read_vector(dec_in);
    block.index = dec_index;
    OrthoBasis basis;
    const OrthoBasis* basis_ptr = nullptr;
    if (!dec_basis.empty()) {
      basis = load_basis(dec_basis);
      basis_ptr = &basis;
    }
    PlainBlock out = dsuper->parsed()
                         ? dec_super(keys, block, basis_ptr, dec_sensitive, dec_levels)
                         : dec_semi(keys.k_r, block, basis_ptr, dec_sensitive, dec_levels);
    write_vector(dec_out, out.values);
    return 0;
  }

  if (stats->parsed()) {
    Eigen::VectorXd x = read_vector(stats_in);
    BlockStats s = permuted_stats(x, stats_spec);
    std::printf("count     %lld\n", static_cast<long long>(x.size()));
    std::printf("mean      %.17g\n", s.mean);
    std::printf("variance  %.17g\n", s.variance);
    std::printf("histogram [%g, %g) in %zu bins\n", s.bin_lo, s.bin_hi, s.histogram.size());
    const double width = (s.bin_hi - s.bin_lo) / double(s.histogram.size());
    for (std::size_t b = 0; b < s.histogram.size(); ++b)
      std::printf("  [%12.6g, %12.6g)  %llu\n", s.bin_lo + width * double(b),
                  s.bin_lo + width * double(b + 1),
                  static_cast<unsigned long long>(s.histogram[b]));
    return 0;
  }

  if (meter->parsed()) {
    mcfg.master = key_from_cli(key_path);
    mcfg.frames = meter_frames;
    SmartMeterResult result = run_smartmeter(mcfg);
    std::printf("frames            %zu\n", result.rows.size());
    std::printf("exact recoveries  %d (rel l2 < 1e-3)\n", result.exact_count);
    std::printf("cloud mean off    %d (deviation > 50%%)\n", result.deviating_count);
    std::printf("not converged     %d\n", result.not_converged);
    std::printf("artifacts in      %s\n", mcfg.out_dir.c_str());
    return 0;
  }

  if (image->parsed()) {
    icfg.master = key_from_cli(key_path);
    icfg.sensitive = parse_rect(image_rect);
    icfg.rates.clear();
    std::stringstream ss(image_rates);
    std::string piece;
    while (std::getline(ss, piece, ','))
      if (!piece.empty()) icfg.rates.push_back(std::stod(piece));
    ImageResult result = run_image(icfg);
    if (!save_basis_path.empty()) {
      OrthoBasis basis = icfg.basis_path.empty()
                             ? klt_train(extract_blocks(load_pgm(icfg.train_image_path.empty()
                                                                     ? icfg.image_path
                                                                     : icfg.train_image_path),
                                                        icfg.block))
                             : load_basis(icfg.basis_path);
      save_basis(basis, save_basis_path);
    }
    std::printf("%6s %6s %14s %14s %14s %14s %14s\n", "rate", "m", "super-full", "super-sens",
                "semi-full", "semi-sens", "cloud-full");
    for (const auto& row : result.rows)
      std::printf("%6.2f %6lld %14.2f %14.2f %14.2f %14.2f %14.2f\n", row.rate,
                  static_cast<long long>(row.m), psnr_capped(row.super_complete),
                  psnr_capped(row.super_sensitive), psnr_capped(row.semi_complete),
                  psnr_capped(row.semi_sensitive), psnr_capped(row.cloud_complete));
    std::printf("artifacts in %s\n", icfg.out_dir.c_str());
    return 0;
  }

  if (psnr_cmd->parsed()) {
    Image a = load_pgm(psnr_a);
    Image b = load_pgm(psnr_b);
    double value = psnr_rect.empty() ? psnr(a, b) : psnr_region(a, b, parse_rect(psnr_rect));
    std::printf("%.4f dB\n", psnr_capped(value));
    return 0;
  }

  if (bench->parsed()) {
    // Field table for the smallest interesting prime, 5 (or the cap if lower).
    const std::uint32_t table_p = bench_max_prime >= 5 ? 5 : bench_max_prime;
    if (table_p >= 3) {
      auto table = secrecy_table(table_p);
      std::printf("ciphertext table over the prime field p=%u (rows r, columns m):\n", table_p);
      for (std::uint32_t r = 0; r + 1 < table_p; ++r) {
        std::printf("  r=%u:", r + 1);
        for (std::uint32_t m = 0; m + 1 < table_p; ++m) std::printf(" %2u", table[r][m]);
        std::printf("\n");
      }
    }

    std::vector<std::pair<std::uint32_t, bool>> verdicts;
    for (std::uint32_t p = 2; p <= bench_max_prime; ++p) {
      if (!is_prime(p)) continue;
      verdicts.emplace_back(p, verify_perfect_secrecy(p).perfect);
    }
    std::printf("perfect secrecy (every ciphertext equally likely for every message):\n");
    for (auto [p, ok] : verdicts) std::printf("  p=%-3u %s\n", p, ok ? "holds" : "VIOLATED");

    BruteForceCounts counts = brute_force_counts(bench_n, bench_k, bench_t);
    std::printf("brute-force accounting for n=%llu k=%llu t=%llu:\n",
                static_cast<unsigned long long>(bench_n),
                static_cast<unsigned long long>(bench_k),
                static_cast<unsigned long long>(bench_t));
    std::printf("  index arrangements n!/(n-k)!   = %s\n", counts.index_count.str().c_str());
    std::printf("  lower bound (n-k+1)^k          = %s\n", counts.lower_bound.str().c_str());
    std::printf("  key-free cloud attack log2     = %.6g\n", counts.cloud_count_log2);

    if (!bench_csv_dir.empty()) {
      std::filesystem::create_directories(bench_csv_dir);
      std::ofstream sec(std::filesystem::path(bench_csv_dir) / "secrecy.csv");
      sec << "p,perfect\n";
      for (auto [p, ok] : verdicts) sec << p << ',' << (ok ? 1 : 0) << '\n';
      std::ofstream cnt(std::filesystem::path(bench_csv_dir) / "counts.csv");
      cnt << "n,k,t,index_count,lower_bound,cloud_count_log2\n";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", counts.cloud_count_log2);
      cnt << bench_n << ',' << bench_k << ',' << bench_t << ',' << counts.index_count.str()
          << ',' << counts.lower_bound.str() << ',' << buf << '\n';
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
