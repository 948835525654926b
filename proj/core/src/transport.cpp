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

#include "bmsauth/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "bmsauth/error.hpp"
#include "bmsauth/protocol.hpp"

namespace bmsauth::net {

namespace {

constexpr std::size_t kMaxRecord = 1u << 20;

[[noreturn]] void throw_errno(const std::string& what) {
  throw Error(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const Address& addr) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  if (inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) == 1) return sa;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(addr.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(ErrorCode::ConfigError, "cannot resolve " + addr.host);
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return sa;
}

}  // namespace

void MemoryEndpoint::write_frame(ByteView frame) {
  {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw Error(ErrorCode::IoError, "pipe closed");
    out_->items.emplace_back(frame.begin(), frame.end());
  }
  out_->cv.notify_one();
}

Bytes MemoryEndpoint::read_frame() {
  std::unique_lock lock(in_->mu);
  in_->cv.wait(lock, [&] { return !in_->items.empty() || in_->closed; });
  if (in_->items.empty()) throw Error(ErrorCode::IoError, "pipe closed");
  Bytes b = std::move(in_->items.front());
  in_->items.pop_front();
  return b;
}

void MemoryEndpoint::close() {
  for (auto* q : {in_.get(), out_.get()}) {
    {
      std::lock_guard lock(q->mu);
      q->closed = true;
    }
    q->cv.notify_all();
  }
}

std::pair<std::unique_ptr<MemoryEndpoint>, std::unique_ptr<MemoryEndpoint>> memory_pipe() {
  auto a = std::make_shared<MemoryEndpoint::Queue>();
  auto b = std::make_shared<MemoryEndpoint::Queue>();
  std::unique_ptr<MemoryEndpoint> left(new MemoryEndpoint());
  std::unique_ptr<MemoryEndpoint> right(new MemoryEndpoint());
  left->in_ = a;
  left->out_ = b;
  right->in_ = b;
  right->out_ = a;
  return {std::move(left), std::move(right)};
}

Address Address::parse(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 == s.size()) {
    throw Error(ErrorCode::ConfigError, "address must be host:port, got '" + s + "'");
  }
  Address a;
  if (colon > 0) a.host = s.substr(0, colon);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad port in '" + s + "'");
  }
  if (port > 65535) throw Error(ErrorCode::ConfigError, "port out of range in '" + s + "'");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

std::string Address::to_string() const { return host + ":" + std::to_string(port); }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

TcpStream::~TcpStream() { close(); }

TcpStream TcpStream::connect(const Address& addr, int timeout_ms) {
  const sockaddr_in sa = resolve(addr);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw_errno("socket");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return TcpStream(fd);
    }
    const int err = errno;
    ::close(fd);
    if ((err != ECONNREFUSED && err != ETIMEDOUT) || std::chrono::steady_clock::now() >= deadline) {
      errno = err;
      throw_errno("connect " + addr.to_string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

void TcpStream::write_all(ByteView data) {
  if (fd_ < 0) throw Error(ErrorCode::IoError, "stream closed");
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    done += static_cast<std::size_t>(n);
  }
}

void TcpStream::read_exact(std::uint8_t* out, std::size_t n) {
  if (fd_ < 0) throw Error(ErrorCode::IoError, "stream closed");
  std::size_t done = 0;
  while (done < n) {
    const ssize_t r = ::recv(fd_, out + done, n - done, 0);
    if (r == 0) throw Error(ErrorCode::IoError, "peer closed the connection");
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw Error(ErrorCode::IoError, "read timed out");
      throw_errno("recv");
    }
    done += static_cast<std::size_t>(r);
  }
}

void TcpStream::write_frame(ByteView frame) { write_all(frame); }

Bytes TcpStream::read_frame() {
  Bytes buf(proto::kHeaderSize);
  read_exact(buf.data(), buf.size());
  const std::size_t total = proto::frame_length_from_header(buf);
  buf.resize(total);
  read_exact(buf.data() + proto::kHeaderSize, total - proto::kHeaderSize);
  return buf;
}

void TcpStream::write_record(ByteView record) {
  if (record.size() > kMaxRecord) throw Error(ErrorCode::Oversize, "record too large");
  Bytes out;
  append_u32(out, static_cast<std::uint32_t>(record.size()));
  append(out, record);
  write_all(out);
}

Bytes TcpStream::read_record() {
  std::uint8_t len_bytes[4];
  read_exact(len_bytes, 4);
  const std::uint32_t len = read_u32(ByteView(len_bytes, 4), 0);
  if (len > kMaxRecord) throw Error(ErrorCode::Oversize, "record too large");
  Bytes out(len);
  read_exact(out.data(), len);
  return out;
}

void TcpStream::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpStream::set_read_timeout(int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  if (::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv) != 0) throw_errno("setsockopt");
}

TcpListener::TcpListener(const Address& addr) {
  const sockaddr_in sa = resolve(addr);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw_errno("socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno("bind " + addr.to_string());
  }
  if (::listen(fd_, 8) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno("listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { close(); }

TcpStream TcpListener::accept(int timeout_ms) {
  if (fd_ < 0) throw Error(ErrorCode::IoError, "listener closed");
  if (timeout_ms > 0) {
    pollfd p{fd_, POLLIN, 0};
    int r;
    do {
      r = ::poll(&p, 1, timeout_ms);
    } while (r < 0 && errno == EINTR);
    if (r < 0) throw_errno("poll");
    if (r == 0) throw Error(ErrorCode::IoError, "no connection within " + std::to_string(timeout_ms) + " ms");
  }
  for (;;) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return TcpStream(fd);
    }
    if (errno != EINTR) throw_errno("accept");
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace bmsauth::net
