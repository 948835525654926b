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

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bmsauth {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Overwrites memory in a way the optimizer may not elide.
void secure_wipe(void* data, std::size_t len) noexcept;

std::string to_hex(ByteView data);

/// Parses an even-length hex string; throws Error(ConfigError) otherwise.
Bytes from_hex(std::string_view hex);

/// Fixed-width value type for identifiers, nonces and challenges.
template <std::size_t N>
struct FixedBytes {
  static constexpr std::size_t kSize = N;
  std::array<std::uint8_t, N> bytes{};

  constexpr std::size_t size() const { return N; }
  const std::uint8_t* data() const { return bytes.data(); }
  std::uint8_t* data() { return bytes.data(); }
  ByteView view() const { return {bytes.data(), N}; }
  bool is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
  }

  static FixedBytes from(ByteView src);

  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
};

/// Fixed-width secret; wiped on destruction.
template <std::size_t N>
class SecretBytes {
 public:
  static constexpr std::size_t kSize = N;

  SecretBytes() = default;
  explicit SecretBytes(ByteView src);
  SecretBytes(const SecretBytes&) = default;
  SecretBytes& operator=(const SecretBytes&) = default;
  ~SecretBytes() { secure_wipe(bytes_.data(), N); }

  constexpr std::size_t size() const { return N; }
  ByteView view() const { return {bytes_.data(), N}; }
  std::uint8_t* data() { return bytes_.data(); }
  const std::uint8_t* data() const { return bytes_.data(); }
  bool is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
  }

  friend bool operator==(const SecretBytes& a, const SecretBytes& b) { return a.bytes_ == b.bytes_; }

 private:
  std::array<std::uint8_t, N> bytes_{};
};

using Key32 = SecretBytes<32>;

/// 8-byte device or SED identifier.
using DeviceId = FixedBytes<8>;
/// 16-byte per-device session identifier assigned during device authentication.
using SessionId = FixedBytes<16>;

void append(Bytes& out, ByteView data);
void append_u16(Bytes& out, std::uint16_t v);
void append_u32(Bytes& out, std::uint32_t v);
void append_u64(Bytes& out, std::uint64_t v);
std::uint16_t read_u16(ByteView in, std::size_t offset);
std::uint32_t read_u32(ByteView in, std::size_t offset);
std::uint64_t read_u64(ByteView in, std::size_t offset);

bool constant_time_equal(ByteView a, ByteView b) noexcept;

/// First 8 bytes of SHA-256(data), hex. Used wherever secret material must be shown.
std::string fingerprint(ByteView data);

}  // namespace bmsauth

#include "bmsauth/bytes_inl.hpp"
