// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
//
// Honest-but-curious storage service: persists ciphertext records, runs the
// l1 decompression on demand, and serves both over a framed TCP protocol.
//
// This module sees only public data. It deliberately has no access to the
// key schedule, the codec, or the sparsifying bases (those headers are not
// included here, so the types cannot even be named): everything the store
// touches is reconstructible from a record and the public sensing seed.
#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mpcc/recovery.hpp"

namespace mpcc {

inline constexpr std::uint8_t kFlagSensitive = 0x01;
inline constexpr std::uint8_t kFlagTransformMode = 0x02;

// Wire layout (all little-endian):
//   magic "MPCC" | version u8 (=1) | flags u8 | index u64 | m u32 | n u32
//   | phi_seed u64 | payload m x float64 | crc32 over all preceding bytes
// Header is the 30 bytes before the payload.
inline constexpr std::size_t kRecordHeaderSize = 30;
inline constexpr std::uint8_t kRecordVersion = 1;

struct CiphertextRecord {
  std::uint8_t flags = 0;
  std::uint64_t index = 0;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint64_t phi_seed = 0;
  std::vector<double> payload;

  bool sensitive() const { return flags & kFlagSensitive; }
  bool transform_mode() const { return flags & kFlagTransformMode; }
};

std::vector<std::uint8_t> encode_record(const CiphertextRecord& rec);
// Throws CorruptRecord on bad magic/version/length/checksum.
CiphertextRecord decode_record(const std::uint8_t* data, std::size_t size);

std::uint64_t options_hash(const SolverOptions& opts);

// Append-only log plus an in-memory index rebuilt by scanning the log on
// open. A torn tail (partial final record) is reported on stderr and
// truncated away so later appends start clean. One (m, n, phi_seed)
// geometry per log; the first record fixes it.
//
// Concurrency: puts are serialized; reads run concurrently; decompression
// results are cached per (index, options-hash) with exactly one solver run
// per cache key, and concurrent solves are bounded by a worker budget
// (MPCC_WORKERS environment variable, default: hardware concurrency).
class CloudStore {
 public:
  explicit CloudStore(const std::string& log_path);
  ~CloudStore();

  CloudStore(const CloudStore&) = delete;
  CloudStore& operator=(const CloudStore&) = delete;

  void put_record(const CiphertextRecord& rec);
  CiphertextRecord get_raw(std::uint64_t index) const;
  DecompressedBlock get_decompressed(std::uint64_t index, const SolverOptions& opts = {});

  bool contains(std::uint64_t index) const;
  std::size_t count() const;
  std::vector<std::uint64_t> indices() const;

  bool configured() const;
  std::uint32_t m() const { return m_; }
  std::uint32_t n() const { return n_; }
  std::uint64_t phi_seed() const { return phi_seed_; }

  // Total solver invocations since open; cache hits do not increment it.
  std::uint64_t solver_runs() const { return solver_runs_.load(); }

 private:
  struct CacheEntry {
    std::once_flag once;
    DecompressedBlock block;
  };

  void adopt_config(const CiphertextRecord& rec);
  const BpSolver& solver();

  std::string log_path_;
  mutable std::mutex mu_;            // records, index, config, log writes
  std::map<std::uint64_t, CiphertextRecord> records_;
  bool configured_ = false;
  std::uint32_t m_ = 0, n_ = 0;
  std::uint64_t phi_seed_ = 0;

  std::mutex cache_mu_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::shared_ptr<CacheEntry>> cache_;
  std::unique_ptr<BpSolver> solver_;
  std::mutex solver_mu_;
  std::atomic<std::uint64_t> solver_runs_{0};

  class WorkerGate;
  std::unique_ptr<WorkerGate> gate_;
};

// Framed query protocol. Every frame is a u32 little-endian body length
// followed by the body. Query body: op u8, index u64 LE. Reply body:
// status u8, index u64 LE, payload length u32 LE, payload float64 LE each,
// crc32 LE over the preceding reply-body bytes.
inline constexpr std::uint8_t kOpFetchDecompressed = 1;
inline constexpr std::uint8_t kOpFetchRaw = 2;
inline constexpr std::uint8_t kOpStatCount = 3;

enum class ReplyStatus : std::uint8_t {
  Ok = 0,
  NotFound = 1,
  UnknownOp = 2,
  Malformed = 3,
  NotConverged = 4,
};

struct QueryReply {
  ReplyStatus status = ReplyStatus::Malformed;
  std::uint64_t index = 0;
  std::vector<double> payload;
};

// TCP front end for a store. start() binds (port 0 picks an ephemeral
// port, see port()) and serves until stop(); one thread per connection,
// one reply per query frame. Malformed frames get a Malformed reply and
// the connection is closed.
class StoreServer {
 public:
  StoreServer(CloudStore& store, std::string host, std::uint16_t port,
              SolverOptions opts = {});
  ~StoreServer();

  void start();  // throws BindFailure
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();
  void handle_connection(int fd);

  CloudStore& store_;
  std::string host_;
  std::uint16_t port_;
  SolverOptions opts_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
};

// Blocking client helper: one connection, one query, one reply.
QueryReply query_store(const std::string& host, std::uint16_t port, std::uint8_t op,
                       std::uint64_t index);

}  // namespace mpcc
