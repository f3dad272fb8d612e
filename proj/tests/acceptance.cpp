// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Release gate: one self-contained check per shipped guarantee, one verdict
// line each, nonzero exit when any check fails. Checks that depend on data
// files resolve them against --data-dir (default: ./data).
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mpcc/cloudstore.hpp"
#include "mpcc/codec.hpp"
#include "mpcc/errors.hpp"
#include "mpcc/image.hpp"
#include "mpcc/keyschedule.hpp"
#include "mpcc/pipelines.hpp"
#include "mpcc/recovery.hpp"
#include "mpcc/securitybench.hpp"
#include "mpcc/sensing.hpp"

using namespace mpcc;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void verdict(int criterion, bool pass, const std::string& detail, double elapsed) {
  std::printf("%s criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str(), elapsed);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// Multiset equality up to one unit in the last place per element, the
// rounding allowance of the mask divide.
bool multiset_match_ulp(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = std::nextafter(a[i], -std::numeric_limits<double>::infinity());
    const double hi = std::nextafter(a[i], std::numeric_limits<double>::infinity());
    if (b[i] < lo || b[i] > hi) return false;
  }
  return true;
}

// 1. Key-side algebra: decrypting a perfectly decompressed block restores
// the plaintext for the superuser and a value-preserving permutation for
// the semi-authorized user.
void criterion_1() {
  Timer timer;
  std::mt19937_64 rng(20260816);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index sizes[3] = {8, 64, 512};
  const int t = 16;

  int super_ok = 0, semi_ok = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::Index n = sizes[trial % 3];
    MasterKey master;
    for (auto& byte : master.secret) byte = std::uint8_t(rng());
    SubKeys keys = derive_subkeys(master);
    const std::uint64_t index = std::uint64_t(trial);

    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = gauss(rng);

    // r (elementwise) applied on top of the index permutation, the exact
    // whitening the encoder performs before sensing.
    Permutation perm = gen_permutation(keys.k_p, index, std::size_t(n));
    MaskVector mask = gen_mask(keys.k_r, index, std::size_t(n), t);
    Eigen::VectorXd permuted = apply_permutation(perm, x);
    Eigen::VectorXd whitened(n);
    for (Eigen::Index i = 0; i < n; ++i)
      whitened(i) = permuted(i) * double(mask.levels[std::size_t(i)]);

    DecompressedBlock block;
    block.z = whitened;
    block.index = index;
    block.converged = true;

    PlainBlock super_block = dec_super(keys, block, nullptr, true, t);
    PlainBlock semi_block = dec_semi(keys.k_r, block, nullptr, true, t);

    const double rel = (super_block.values - x).norm() / x.norm();
    if (rel <= 1e-12) ++super_ok;
    std::vector<double> xs(x.data(), x.data() + n);
    std::vector<double> ss(semi_block.values.data(), semi_block.values.data() + n);
    if (multiset_match_ulp(xs, ss)) ++semi_ok;
  }

  const double elapsed = timer.seconds();
  const bool pass = super_ok == trials && semi_ok == trials && elapsed < 10.0;
  verdict(1, pass,
          fmt("algebraic round trip: exact superuser %d/%d, permutation multiset %d/%d, "
              "budget 10s",
              super_ok, trials, semi_ok, trials),
          elapsed);
}

// 2. Meter-regime end-to-end recovery through the store's l1 decompressor.
void criterion_2() {
  Timer timer;
  SmartMeterConfig config;
  for (std::size_t i = 0; i < 32; ++i) config.master.secret[i] = std::uint8_t(0xC2 + i);
  config.frames = 50;

  SmartMeterResult result = run_smartmeter(config);
  int stats_ok = 0;
  for (const auto& row : result.rows) {
    if (!row.exact) continue;
    if (std::abs(row.semi_mean - row.true_mean) <= 1e-6 &&
        std::abs(row.semi_variance - row.true_variance) <= 1e-6)
      ++stats_ok;
  }
  const double elapsed = timer.seconds();
  const bool pass = result.exact_count >= 48 && stats_ok == result.exact_count &&
                    elapsed < 300.0;
  verdict(2, pass,
          fmt("meter recovery: exact %d/50 (need >= 48), stats within 1e-6 in %d/%d exact "
              "frames, budget 300s",
              result.exact_count, stats_ok, result.exact_count),
          elapsed);
}

// 3. The store's convex decompressor against the combinatorial sparsest
// solution on small dense instances.
void criterion_3() {
  Timer timer;
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 1.5);

  const Eigen::Index n = 12, m = 6;
  const int instances = 200;
  int matched = 0, feasible = 0;

  SolverOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-9;
  opts.max_iters = 20000;

  for (int inst = 0; inst < instances; ++inst) {
    SensingMatrix phi = gen_sensing_matrix(9000 + std::uint64_t(inst), m, n);
    const int k = 1 + inst % 2;  // both admissible sparsity levels, evenly
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    std::vector<int> support;
    while (int(support.size()) < k) {
      int pos = int(rng() % std::uint64_t(n));
      if (std::find(support.begin(), support.end(), pos) == support.end())
        support.push_back(pos);
    }
    for (int pos : support) z(pos) = (rng() % 2 ? 1.0 : -1.0) * mag(rng);
    Eigen::VectorXd y = reference::measure_serial(phi, z);

    DecompressedBlock bp = solve_bp(phi, y, opts);
    if (bp.residual <= 1e-8) ++feasible;
    L0Result oracle = l0_oracle(phi, y, 2);
    if (detect_support(bp.z) == oracle.support) ++matched;
  }

  const double elapsed = timer.seconds();
  const bool pass = matched >= 190 && feasible == instances;
  verdict(3, pass,
          fmt("l1-l0 support agreement %d/200 (need >= 190), feasible %d/200; the convex "
              "and combinatorial programs genuinely part ways this often at 6x12",
              matched, feasible),
          elapsed);
}

// 4. Exhaustive single-residue secrecy check over small prime fields.
void criterion_4() {
  Timer timer;
  bool all_perfect = true;
  for (std::uint32_t p = 2; p <= 31; ++p) {
    if (!is_prime(p)) continue;
    if (!verify_perfect_secrecy(p).perfect) all_perfect = false;
  }
  const std::vector<std::vector<std::uint32_t>> expected = {
      {1, 2, 3, 4}, {2, 4, 1, 3}, {3, 1, 4, 2}, {4, 3, 2, 1}};
  const bool table_ok = secrecy_table(5) == expected;
  const double elapsed = timer.seconds();
  const bool pass = all_perfect && table_ok && elapsed < 1.0;
  verdict(4, pass,
          fmt("perfect secrecy for all primes <= 31: %s; mod-5 table entry-for-entry: %s, "
              "budget 1s",
              all_perfect ? "yes" : "NO", table_ok ? "yes" : "NO"),
          elapsed);
}

// 5. Brute-force counting claims, including the strict form of the
// index-count bound over every small (n, k).
void criterion_5() {
  Timer timer;
  const BruteForceCounts reference_counts = brute_force_counts(256, 30, 16);
  const bool log_ok = reference_counts.cloud_count_log2 == 390.0;

  bool strict_ok = true;
  std::uint64_t bad_n = 0, bad_k = 0;
  for (std::uint64_t n = 2; n <= 64 && strict_ok; ++n)
    for (std::uint64_t k = 1; k < n; ++k) {
      BruteForceCounts c = brute_force_counts(n, k, 16);
      if (!(c.index_count > c.lower_bound)) {
        strict_ok = false;
        bad_n = n;
        bad_k = k;
        break;
      }
    }

  const double elapsed = timer.seconds();
  const bool pass = log_ok && strict_ok;
  std::string detail =
      fmt("cloud attack exponent (256,30,16) = %.1f (need exactly 390)", reference_counts.cloud_count_log2);
  if (strict_ok)
    detail += "; strict index bound holds for all 1 <= k < n <= 64";
  else
    detail += fmt("; strict index bound FAILS first at n=%llu k=%llu where n!/(n-k)! = "
                  "(n-k+1)^k = %llu (k=1 always gives equality, not >)",
                  (unsigned long long)bad_n, (unsigned long long)bad_k,
                  (unsigned long long)bad_n);
  verdict(5, pass, detail, elapsed);
}

// 6. Image-pipeline quality trends across sampling rates.
void criterion_6(const std::string& data_dir) {
  Timer timer;

  // Basis trained on a disjoint scene drawn from the same ensemble as the
  // bundled image (a larger canvas, so the training covariance is not rank
  // limited by the block count). Trained-basis coefficients of the test
  // blocks then carry genuine mid-spectrum energy, which is what makes
  // reconstruction quality rate-dependent.
  const auto train_path = std::filesystem::temp_directory_path() /
                          ("mpcc_accept6_train_" + std::to_string(::getpid()) + ".pgm");
  save_pgm(synthetic_scene(1024, 1024, 777), train_path.string());

  ImageConfig config;
  for (std::size_t i = 0; i < 32; ++i) config.master.secret[i] = std::uint8_t(0x5A + i);
  config.image_path = (std::filesystem::path(data_dir) / "testimage.pgm").string();
  config.train_image_path = train_path.string();
  config.block = 32;
  config.rates = {0.2, 0.3, 0.4, 0.5};
  config.sensitive = Rect{192, 160, 128, 128};
  // Coefficient blocks are compressible, not exactly sparse: a small mask
  // level set, a relaxed residual budget, and a hard iteration cap keep the
  // run inside a single-core time budget. Capped solves still return a
  // feasible iterate whose quality has plateaued, so the trends below are
  // driven by the sampling rate, not by the cap.
  config.t = 2;
  config.epsilon_rel = 3e-3;
  config.solver.abs_tol = 1e-6;
  config.solver.rel_tol = 2e-4;
  config.solver.max_iters = 2500;

  ImageResult result = run_image(config);
  std::filesystem::remove(train_path);
  const auto& rows = result.rows;

  bool increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].super_complete <= rows[i - 1].super_complete) increasing = false;
  const double super_rise = rows.back().super_complete - rows.front().super_complete;
  double semi_lo = rows[0].semi_complete, semi_hi = rows[0].semi_complete;
  double semi_sens_max = rows[0].semi_sensitive;
  for (const auto& row : rows) {
    semi_lo = std::min(semi_lo, row.semi_complete);
    semi_hi = std::max(semi_hi, row.semi_complete);
    semi_sens_max = std::max(semi_sens_max, row.semi_sensitive);
  }

  const double elapsed = timer.seconds();
  const bool pass = increasing && super_rise > 10.0 && (semi_hi - semi_lo) < 3.0 &&
                    semi_sens_max < 15.0 && elapsed < 900.0;
  verdict(6, pass,
          fmt("image trends: super %.1f/%.1f/%.1f/%.1f dB %s, rise %.1f dB (need > 10), "
              "semi spread %.2f dB (need < 3), semi sensitive max %.1f dB (need < 15), "
              "budget 900s",
              rows[0].super_complete, rows[1].super_complete, rows[2].super_complete,
              rows[3].super_complete, increasing ? "strictly increasing" : "NOT increasing",
              super_rise, semi_hi - semi_lo, semi_sens_max),
          elapsed);
}

// 7. What the curious store operator learns from the decompressed vector:
// its mean must be far off the plaintext mean in nearly every frame.
void criterion_7() {
  Timer timer;
  SmartMeterConfig config;
  for (std::size_t i = 0; i < 32; ++i) config.master.secret[i] = std::uint8_t(0x77 + i);
  config.frames = 200;

  SmartMeterResult result = run_smartmeter(config);
  const double elapsed = timer.seconds();
  const bool pass = result.deviating_count >= 180;
  verdict(7, pass,
          fmt("store-side mean off by > 50%% in %d/200 frames (need >= 180)",
              result.deviating_count),
          elapsed);
}

// 8. Storage durability and query semantics.
void criterion_8() {
  Timer timer;
  const auto log_path = std::filesystem::temp_directory_path() /
                        ("mpcc_accept8_" + std::to_string(::getpid()) + ".log");
  std::filesystem::remove(log_path);

  bool roundtrip_ok = true, corrupt_ok = false, rebuild_ok = false, cache_ok = false;

  const std::uint32_t m = 8, n = 16;
  SensingMatrix phi = gen_sensing_matrix(88, m, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(5) = 2.0;
  Eigen::VectorXd y = reference::measure_serial(phi, x);

  CiphertextRecord rec;
  rec.index = 12;
  rec.m = m;
  rec.n = n;
  rec.phi_seed = 88;
  rec.payload.assign(y.data(), y.data() + y.size());
  {
    CloudStore store(log_path.string());
    store.put_record(rec);
  }
  {
    // Fresh process image: everything must come back bitwise from the log.
    CloudStore store(log_path.string());
    CiphertextRecord got = store.get_raw(12);
    auto want = encode_record(rec);
    auto have = encode_record(got);
    roundtrip_ok = want.size() == have.size() &&
                   std::memcmp(want.data(), have.data(), want.size()) == 0;

    auto bytes = encode_record(rec);
    bytes[kRecordHeaderSize + 2] ^= 0x10;
    try {
      decode_record(bytes.data(), bytes.size());
    } catch (const CorruptRecord&) {
      corrupt_ok = true;
    }

    // Concurrent duplicate decompress queries share exactly one solver run.
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
      threads.emplace_back([&store] { (void)store.get_decompressed(12); });
    for (auto& t : threads) t.join();
    cache_ok = store.solver_runs() == 1;
    (void)store.get_decompressed(12);
    cache_ok = cache_ok && store.solver_runs() == 1;
  }
  std::filesystem::remove(log_path);

  // Bulk rebuild: 10,000 records, index reconstructed by scanning the log.
  double rebuild_seconds = 0.0;
  {
    CloudStore store(log_path.string());
    CiphertextRecord bulk;
    bulk.m = 4;
    bulk.n = 8;
    bulk.phi_seed = 1;
    bulk.payload = {0, 0, 0, 0};
    for (std::uint64_t i = 0; i < 10000; ++i) {
      bulk.index = i;
      bulk.payload[0] = double(i);
      store.put_record(bulk);
    }
  }
  {
    Timer rebuild;
    CloudStore store(log_path.string());
    rebuild_seconds = rebuild.seconds();
    rebuild_ok = store.count() == 10000 && rebuild_seconds < 5.0;
  }
  std::filesystem::remove(log_path);

  const double elapsed = timer.seconds();
  const bool pass = roundtrip_ok && corrupt_ok && rebuild_ok && cache_ok;
  verdict(8, pass,
          fmt("storage: restart round trip %s, corruption rejected %s, 10k rebuild %.2fs "
              "(need < 5), one solver run per cache key %s",
              roundtrip_ok ? "bitwise" : "BROKEN", corrupt_ok ? "yes" : "NO", rebuild_seconds,
              cache_ok ? "yes" : "NO"),
          elapsed);
}

// 9. Device-side cost model: measured multiply-accumulate count is linear
// in the measurement workload m*n.
void criterion_9() {
  Timer timer;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> log_mn, log_flops;
  for (auto [m, n] : std::vector<std::pair<Eigen::Index, Eigen::Index>>{
           {64, 256}, {128, 512}, {256, 1024}}) {
    SensingMatrix phi = gen_sensing_matrix(std::uint64_t(m), m, n);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss(rng);
    std::uint64_t flops = 0;
    (void)reference::measure_serial(phi, z, &flops);
    log_mn.push_back(std::log(double(m) * double(n)));
    log_flops.push_back(std::log(double(flops)));
  }
  const double r2 = r_squared(log_mn, log_flops);
  const double elapsed = timer.seconds();
  const bool pass = r2 > 0.99;
  verdict(9, pass, fmt("encoder cost log-log linearity R^2 = %.6f (need > 0.99)", r2),
          elapsed);
}

}  // namespace

int main(int argc, char** argv) {
  std::string data_dir = "data";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--data-dir") == 0 && i + 1 < argc) {
      data_dir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--data-dir DIR]\n", argv[0]);
      return 2;
    }
  }

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6(data_dir);
  criterion_7();
  criterion_8();
  criterion_9();

  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
