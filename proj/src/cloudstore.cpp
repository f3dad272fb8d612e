// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#include "mpcc/cloudstore.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <semaphore>

#include "mpcc/bytes.hpp"
#include "mpcc/errors.hpp"

namespace mpcc {

std::vector<std::uint8_t> encode_record(const CiphertextRecord& rec) {
  if (rec.payload.size() != rec.m)
    throw DimensionMismatch("encode_record: payload length != m");
  std::vector<std::uint8_t> buf;
  buf.reserve(kRecordHeaderSize + 8 * rec.payload.size() + 4);
  buf.push_back('M');
  buf.push_back('P');
  buf.push_back('C');
  buf.push_back('C');
  put_u8(buf, kRecordVersion);
  put_u8(buf, rec.flags);
  put_u64(buf, rec.index);
  put_u32(buf, rec.m);
  put_u32(buf, rec.n);
  put_u64(buf, rec.phi_seed);
  for (double v : rec.payload) put_f64(buf, v);
  put_u32(buf, crc32(buf.data(), buf.size()));
  return buf;
}

CiphertextRecord decode_record(const std::uint8_t* data, std::size_t size) {
  if (size < kRecordHeaderSize + 4) throw CorruptRecord("record shorter than header");
  if (std::memcmp(data, "MPCC", 4) != 0) throw CorruptRecord("bad record magic");
  if (data[4] != kRecordVersion) throw CorruptRecord("unsupported record version");

  CiphertextRecord rec;
  rec.flags = data[5];
  rec.index = load_u64_le(data + 6);
  rec.m = load_u32_le(data + 14);
  rec.n = load_u32_le(data + 18);
  rec.phi_seed = load_u64_le(data + 22);

  const std::size_t expected = kRecordHeaderSize + std::size_t(rec.m) * 8 + 4;
  if (size != expected) throw CorruptRecord("record length mismatch");
  const std::uint32_t stored = load_u32_le(data + size - 4);
  if (crc32(data, size - 4) != stored) throw CorruptRecord("record checksum mismatch");

  rec.payload.resize(rec.m);
  for (std::uint32_t i = 0; i < rec.m; ++i)
    rec.payload[i] = load_f64_le(data + kRecordHeaderSize + std::size_t(i) * 8);
  return rec;
}

std::uint64_t options_hash(const SolverOptions& opts) {
  // FNV-1a over the option fields' raw bytes; stable within a run, which is
  // all a cache key needs.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&opts.epsilon, sizeof opts.epsilon);
  mix(&opts.max_iters, sizeof opts.max_iters);
  mix(&opts.rho, sizeof opts.rho);
  mix(&opts.abs_tol, sizeof opts.abs_tol);
  mix(&opts.rel_tol, sizeof opts.rel_tol);
  std::uint8_t debias = opts.debias ? 1 : 0;
  mix(&debias, 1);
  return h;
}

// Bounds the number of simultaneously running solver invocations.
class CloudStore::WorkerGate {
 public:
  explicit WorkerGate(std::ptrdiff_t budget) : sem_(budget) {}
  void acquire() { sem_.acquire(); }
  void release() { sem_.release(); }

 private:
  std::counting_semaphore<> sem_;
};

namespace {

std::ptrdiff_t worker_budget() {
  if (const char* env = std::getenv("MPCC_WORKERS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return std::ptrdiff_t(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::ptrdiff_t(hw ? hw : 1);
}

}  // namespace

CloudStore::CloudStore(const std::string& log_path)
    : log_path_(log_path), gate_(std::make_unique<WorkerGate>(worker_budget())) {
  std::ifstream in(log_path_, std::ios::binary);
  if (!in) return;  // fresh store; file created on first put
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  in.close();

  std::size_t off = 0;
  std::size_t good_end = 0;
  while (off + kRecordHeaderSize + 4 <= bytes.size()) {
    // Peek m to learn the record extent, then decode (and CRC-check) it.
    if (std::memcmp(bytes.data() + off, "MPCC", 4) != 0) break;
    const std::uint32_t m = load_u32_le(bytes.data() + off + 14);
    const std::size_t extent = kRecordHeaderSize + std::size_t(m) * 8 + 4;
    if (off + extent > bytes.size()) break;
    CiphertextRecord rec;
    try {
      rec = decode_record(bytes.data() + off, extent);
    } catch (const CorruptRecord&) {
      break;
    }
    if (!configured_) adopt_config(rec);
    if (rec.m == m_ && rec.n == n_ && rec.phi_seed == phi_seed_)
      records_[rec.index] = std::move(rec);  // duplicate index: last write wins
    off += extent;
    good_end = off;
  }

  if (good_end != bytes.size()) {
    std::fprintf(stderr,
                 "warning: store log %s has a torn tail (%zu of %zu bytes usable); truncating\n",
                 log_path_.c_str(), good_end, bytes.size());
    if (::truncate(log_path_.c_str(), off_t(good_end)) != 0)
      std::fprintf(stderr, "warning: could not truncate %s: %s\n", log_path_.c_str(),
                   std::strerror(errno));
  }
}

CloudStore::~CloudStore() = default;

bool CloudStore::configured() const {
  std::lock_guard<std::mutex> lock(mu_);
  return configured_;
}

void CloudStore::adopt_config(const CiphertextRecord& rec) {
  if (rec.m < 1 || rec.n < 1 || rec.m > rec.n)
    throw DimensionMismatch("store: record geometry must satisfy 1 <= m <= n");
  configured_ = true;
  m_ = rec.m;
  n_ = rec.n;
  phi_seed_ = rec.phi_seed;
}

void CloudStore::put_record(const CiphertextRecord& rec) {
  std::vector<std::uint8_t> bytes = encode_record(rec);  // validates payload length
  std::lock_guard<std::mutex> lock(mu_);
  if (!configured_) {
    adopt_config(rec);
  } else if (rec.m != m_ || rec.n != n_ || rec.phi_seed != phi_seed_) {
    throw DimensionMismatch("store: record geometry does not match this log");
  }
  std::ofstream out(log_path_, std::ios::binary | std::ios::app);
  if (!out) throw ParseError("store: cannot open log for append: " + log_path_);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  out.flush();
  if (!out) throw ParseError("store: short append to " + log_path_);
  records_[rec.index] = rec;
}

CiphertextRecord CloudStore::get_raw(std::uint64_t index) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = records_.find(index);
  if (it == records_.end())
    throw NotFound("store: no record at index " + std::to_string(index));
  return it->second;
}

bool CloudStore::contains(std::uint64_t index) const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_.count(index) != 0;
}

std::size_t CloudStore::count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_.size();
}

std::vector<std::uint64_t> CloudStore::indices() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::uint64_t> out;
  out.reserve(records_.size());
  for (const auto& [idx, rec] : records_) out.push_back(idx);
  return out;
}

const BpSolver& CloudStore::solver() {
  std::lock_guard<std::mutex> lock(solver_mu_);
  if (!solver_) {
    std::uint32_t m, n;
    std::uint64_t seed;
    {
      std::lock_guard<std::mutex> cfg(mu_);
      if (!configured_) throw NotFound("store: empty store has no geometry");
      m = m_;
      n = n_;
      seed = phi_seed_;
    }
    solver_ = std::make_unique<BpSolver>(gen_sensing_matrix(seed, m, n));
  }
  return *solver_;
}

DecompressedBlock CloudStore::get_decompressed(std::uint64_t index, const SolverOptions& opts) {
  CiphertextRecord rec = get_raw(index);  // NotFound propagates

  const auto key = std::make_pair(index, options_hash(opts));
  std::shared_ptr<CacheEntry> entry;
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, std::make_shared<CacheEntry>()).first;
    entry = it->second;
  }

  const BpSolver& bp = solver();
  std::call_once(entry->once, [&] {
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(rec.payload.data(),
                                                          Eigen::Index(rec.payload.size()));
    gate_->acquire();
    DecompressedBlock block;
    try {
      block = bp.solve(y, opts);
    } catch (...) {
      gate_->release();
      throw;
    }
    gate_->release();
    block.index = index;
    solver_runs_.fetch_add(1);
    entry->block = std::move(block);
  });
  return entry->block;
}

namespace {

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::read(fd, buf + got, n - got);
    if (r <= 0) {
      if (r < 0 && errno == EINTR) continue;
      return false;
    }
    got += std::size_t(r);
  }
  return true;
}

bool write_all(int fd, const std::uint8_t* buf, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    ssize_t w = ::write(fd, buf + sent, n - sent);
    if (w <= 0) {
      if (w < 0 && errno == EINTR) continue;
      return false;
    }
    sent += std::size_t(w);
  }
  return true;
}

std::vector<std::uint8_t> build_reply(ReplyStatus status, std::uint64_t index,
                                      const std::vector<double>& payload) {
  std::vector<std::uint8_t> body;
  body.reserve(1 + 8 + 4 + payload.size() * 8 + 4);
  put_u8(body, static_cast<std::uint8_t>(status));
  put_u64(body, index);
  put_u32(body, std::uint32_t(payload.size()));
  for (double v : payload) put_f64(body, v);
  put_u32(body, crc32(body.data(), body.size()));

  std::vector<std::uint8_t> frame;
  frame.reserve(4 + body.size());
  put_u32(frame, std::uint32_t(body.size()));
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

constexpr std::uint32_t kMaxFrameBody = 1u << 20;

}  // namespace

StoreServer::StoreServer(CloudStore& store, std::string host, std::uint16_t port,
                         SolverOptions opts)
    : store_(store), host_(std::move(host)), port_(port), opts_(opts) {}

StoreServer::~StoreServer() { stop(); }

void StoreServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindFailure("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (host_.empty() || host_ == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("unparseable listen address: " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("bind " + host_ + ":" + std::to_string(port_) + ": " + err);
  }
  if (::listen(listen_fd_, 64) != 0) {
    std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("listen: " + err);
  }
  if (port_ == 0) {
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }
  running_.store(true);
  accept_thread_ = std::thread(&StoreServer::accept_loop, this);
}

void StoreServer::stop() {
  if (!running_.exchange(false)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> conns;
  {
    std::lock_guard<std::mutex> lock(conn_mu_);
    conns.swap(conn_threads_);
  }
  for (auto& t : conns)
    if (t.joinable()) t.join();
}

void StoreServer::accept_loop() {
  while (running_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed by stop()
    }
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_threads_.emplace_back(&StoreServer::handle_connection, this, fd);
  }
}

void StoreServer::handle_connection(int fd) {
  for (;;) {
    std::uint8_t len_buf[4];
    if (!read_exact(fd, len_buf, 4)) break;  // clean close between frames
    const std::uint32_t body_len = load_u32_le(len_buf);

    bool malformed = body_len != 9;
    std::uint8_t op = 0;
    std::uint64_t index = 0;
    if (body_len > 0 && body_len <= kMaxFrameBody) {
      std::vector<std::uint8_t> body(body_len);
      if (!read_exact(fd, body.data(), body.size())) {
        // Truncated frame: answer with a malformed status, then drop the
        // connection (the stream offset is unrecoverable).
        auto frame = build_reply(ReplyStatus::Malformed, 0, {});
        write_all(fd, frame.data(), frame.size());
        break;
      }
      if (!malformed) {
        op = body[0];
        index = load_u64_le(body.data() + 1);
      }
    } else if (body_len != 0) {
      malformed = true;  // absurd length prefix; nothing sensible to read
    }

    std::vector<std::uint8_t> frame;
    if (malformed) {
      frame = build_reply(ReplyStatus::Malformed, 0, {});
      write_all(fd, frame.data(), frame.size());
      break;
    }

    switch (op) {
      case kOpFetchDecompressed: {
        try {
          DecompressedBlock block = store_.get_decompressed(index, opts_);
          std::vector<double> payload(std::size_t(block.z.size()));
          Eigen::Map<Eigen::VectorXd>(payload.data(), block.z.size()) = block.z;
          // The residual budget is re-checked before anything leaves the
          // process; a feasible-but-unconverged solution is reported as
          // such and the consumer decides.
          const bool feasible = block.residual <= opts_.epsilon + 1e-8;
          frame = build_reply(
              block.converged && feasible ? ReplyStatus::Ok : ReplyStatus::NotConverged, index,
              payload);
        } catch (const NotFound&) {
          frame = build_reply(ReplyStatus::NotFound, index, {});
        }
        break;
      }
      case kOpFetchRaw: {
        try {
          CiphertextRecord rec = store_.get_raw(index);
          frame = build_reply(ReplyStatus::Ok, index, rec.payload);
        } catch (const NotFound&) {
          frame = build_reply(ReplyStatus::NotFound, index, {});
        }
        break;
      }
      case kOpStatCount: {
        frame = build_reply(ReplyStatus::Ok, index, {double(store_.count())});
        break;
      }
      default:
        frame = build_reply(ReplyStatus::UnknownOp, index, {});
        break;
    }
    if (!write_all(fd, frame.data(), frame.size())) break;
  }
  ::close(fd);
}

QueryReply query_store(const std::string& host, std::uint16_t port, std::uint8_t op,
                       std::uint64_t index) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw BindFailure("socket: " + std::string(std::strerror(errno)));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string target = host.empty() ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, target.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw BindFailure("unparseable host address: " + target);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd);
    throw BindFailure("connect " + target + ":" + std::to_string(port) + ": " + err);
  }

  std::vector<std::uint8_t> frame;
  put_u32(frame, 9);
  put_u8(frame, op);
  put_u64(frame, index);
  if (!write_all(fd, frame.data(), frame.size())) {
    ::close(fd);
    throw ParseError("query: send failed");
  }

  std::uint8_t len_buf[4];
  if (!read_exact(fd, len_buf, 4)) {
    ::close(fd);
    throw ParseError("query: connection closed before reply");
  }
  const std::uint32_t body_len = load_u32_le(len_buf);
  if (body_len < 1 + 8 + 4 + 4 || body_len > (kMaxFrameBody + 64)) {
    ::close(fd);
    throw ParseError("query: implausible reply length");
  }
  std::vector<std::uint8_t> body(body_len);
  if (!read_exact(fd, body.data(), body.size())) {
    ::close(fd);
    throw ParseError("query: truncated reply");
  }
  ::close(fd);

  const std::uint32_t stored = load_u32_le(body.data() + body.size() - 4);
  if (crc32(body.data(), body.size() - 4) != stored)
    throw CorruptRecord("query: reply checksum mismatch");

  QueryReply reply;
  reply.status = static_cast<ReplyStatus>(body[0]);
  reply.index = load_u64_le(body.data() + 1);
  const std::uint32_t len = load_u32_le(body.data() + 9);
  if (body.size() != 1 + 8 + 4 + std::size_t(len) * 8 + 4)
    throw CorruptRecord("query: reply length mismatch");
  reply.payload.resize(len);
  for (std::uint32_t i = 0; i < len; ++i)
    reply.payload[i] = load_f64_le(body.data() + 13 + std::size_t(i) * 8);
  return reply;
}

}  // namespace mpcc
