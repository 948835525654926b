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

#include <cstdint>

#include "bmsauth/bytes.hpp"
#include "bmsauth/ec_group.hpp"

namespace bmsauth::cert {

inline constexpr std::uint8_t kCertVersion = 0x01;
/// version, algorithm_id, session_id, issuer_id, subject_id, valid_from, valid_to.
inline constexpr std::size_t kFixedPrefixSize = 1 + 1 + 16 + 8 + 8 + 8 + 8;

struct CertMeta {
  ec::AlgorithmId algorithm_id = ec::kP256Sha256;
  DeviceId issuer_id;
  DeviceId subject_id;
  std::uint64_t valid_from = 0;  // seconds since epoch, inclusive
  std::uint64_t valid_to = 0;    // exclusive

  friend bool operator==(const CertMeta&, const CertMeta&) = default;
};

/// Canonical minimal-encoding certificate bytes. Only encode() and decode()-validated
/// input produce one.
class EncodedCertificate {
 public:
  EncodedCertificate() = default;
  /// Wraps bytes without validation; decode() is the only parser.
  static EncodedCertificate from_bytes(Bytes b) {
    EncodedCertificate c;
    c.bytes_ = std::move(b);
    return c;
  }
  const Bytes& bytes() const { return bytes_; }
  ByteView view() const { return bytes_; }
  std::size_t size() const { return bytes_.size(); }

  friend bool operator==(const EncodedCertificate&, const EncodedCertificate&) = default;

 private:
  Bytes bytes_;
};

struct DecodedCertificate {
  SessionId session_id;
  CertMeta meta;
  ec::Point reconstruction_point;
};

/// Layout (big-endian):
///   version(1) | algorithm_id(1) | session_id(16) | issuer_id(8) | subject_id(8)
///   | valid_from(8) | valid_to(8) | point (0x00, or 0x04 | x | y)
/// Throws Error(UnknownAlgorithm), Error(InvalidValidity) or Error(CurveMismatch).
EncodedCertificate encode(const SessionId& session_id, const CertMeta& meta,
                          const ec::Point& reconstruction_point);

/// Strict inverse of encode(). Each failure carries a distinct ErrorCode and the
/// byte offset where parsing stopped.
DecodedCertificate decode(ByteView bytes);
inline DecodedCertificate decode(const EncodedCertificate& c) { return decode(c.view()); }

bool is_valid_at(const CertMeta& meta, std::uint64_t now);

}  // namespace bmsauth::cert
