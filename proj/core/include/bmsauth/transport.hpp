/*
 * Copyright (C) 2026 The bmsauth Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "bmsauth/bytes.hpp"

namespace bmsauth::net {

/// Ordered, reliable, bidirectional frame stream.
class FrameTransport {
 public:
  virtual ~FrameTransport() = default;
  virtual void write_frame(ByteView frame) = 0;
  /// Blocks until a complete protocol frame arrives. Throws Error(IoError) on close.
  virtual Bytes read_frame() = 0;
  /// Length-prefixed application record (u32 length | bytes).
  virtual void write_record(ByteView record) = 0;
  virtual Bytes read_record() = 0;
  virtual void close() = 0;
};

/// One end of an in-memory pipe. Thread-safe.
class MemoryEndpoint final : public FrameTransport {
 public:
  void write_frame(ByteView frame) override;
  Bytes read_frame() override;
  void write_record(ByteView record) override { write_frame(record); }
  Bytes read_record() override { return read_frame(); }
  void close() override;

 private:
  struct Queue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Bytes> items;
    bool closed = false;
  };
  friend std::pair<std::unique_ptr<MemoryEndpoint>, std::unique_ptr<MemoryEndpoint>> memory_pipe();
  std::shared_ptr<Queue> in_;
  std::shared_ptr<Queue> out_;
};

std::pair<std::unique_ptr<MemoryEndpoint>, std::unique_ptr<MemoryEndpoint>> memory_pipe();

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws Error(ConfigError).
  static Address parse(const std::string& s);
  std::string to_string() const;
};

class TcpStream final : public FrameTransport {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() override;

  /// Retries refused connections until `timeout_ms` elapses.
  static TcpStream connect(const Address& addr, int timeout_ms = 5000);

  void write_frame(ByteView frame) override;
  Bytes read_frame() override;
  void write_record(ByteView record) override;
  Bytes read_record() override;
  void close() override;

  /// SO_RCVTIMEO; 0 disables. A timed-out read throws Error(IoError).
  void set_read_timeout(int timeout_ms);

 private:
  void write_all(ByteView data);
  void read_exact(std::uint8_t* out, std::size_t n);
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Port 0 binds an ephemeral port; see port().
  explicit TcpListener(const Address& addr);
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  std::uint16_t port() const { return port_; }
  /// Blocks for a connection; with timeout_ms > 0 throws Error(IoError) once it elapses.
  TcpStream accept(int timeout_ms = 0);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace bmsauth::net
