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
#include <optional>
#include <string_view>
#include <vector>

#include "bmsauth/bytes.hpp"
#include "bmsauth/ec_group.hpp"

namespace bmsauth::proto {

// Frame: magic(2) | version(1) | msg_type(1) | session_id(16) | payload_len(4) | TLVs
// TLV:   field_id(1) | len(2) | value
inline constexpr std::uint8_t kMagic0 = 0xB4;
inline constexpr std::uint8_t kMagic1 = 0x5A;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::size_t kMaxPayload = 64 * 1024;
inline constexpr std::size_t kSessionIdOffset = 4;

enum class MsgType : std::uint8_t {
  AuthHello = 0x01,
  AuthChallenge = 0x02,
  AuthResponse = 0x03,
  AuthConfig = 0x04,
  AuthConfirm = 0x05,
  CertRequest = 0x06,
  CertResponse = 0x07,
  CertAck = 0x08,
  SessHello = 0x09,
  SessChallenge = 0x0A,
  SessResponse = 0x0B,
  SessConfirm = 0x0C,
};

enum class FieldId : std::uint8_t {
  DeviceId = 0x01,
  Challenge = 0x02,
  Nonce = 0x03,
  Ciphertext = 0x04,
  MacTag = 0x05,
  Point = 0x06,
  Certificate = 0x07,
  Scalar = 0x08,
  Role = 0x09,
};

std::string_view to_string(MsgType t);
std::optional<MsgType> msg_type_from_string(std::string_view name);
bool is_known_msg_type(std::uint8_t v);
bool is_known_field(std::uint8_t v);

struct Field {
  FieldId id;
  Bytes value;

  friend bool operator==(const Field&, const Field&) = default;
};

struct ProtocolMessage {
  MsgType msg_type = MsgType::AuthHello;
  SessionId session_id;  // zero until assigned
  std::vector<Field> payload;

  ProtocolMessage() = default;
  ProtocolMessage(MsgType type, const SessionId& sid) : msg_type(type), session_id(sid) {}

  /// Appends a field; throws Error(DuplicateField) when the id is already present.
  ProtocolMessage& add(FieldId id, ByteView value);
  std::optional<ByteView> get(FieldId id) const;
  /// Throws Error(MissingField).
  ByteView require(FieldId id) const;
  /// Throws Error(MissingField) or Error(LengthMismatch).
  template <std::size_t N>
  FixedBytes<N> require_fixed(FieldId id) const {
    return FixedBytes<N>::from(require(id));
  }

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

/// Throws Error(Oversize) when the TLV payload exceeds kMaxPayload or a value exceeds 65535 bytes.
Bytes frame(const ProtocolMessage& msg);

/// Strict parse. Errors: BadMagic, UnknownVersion, LengthMismatch (overrun/underrun
/// or truncated header), Oversize, UnknownMessageType, UnknownField, DuplicateField.
ProtocolMessage parse(ByteView bytes);

/// Total frame length announced by a complete 24-byte header; used by stream transports.
std::size_t frame_length_from_header(ByteView header);

/// Message type byte of a raw frame, if long enough and recognized.
std::optional<MsgType> peek_msg_type(ByteView bytes);

/// Context bound into every MAC and seal: "BMSA" | version | msg_type | flow_step | session_id.
Bytes transcript_mac_header(MsgType msg_type, const SessionId& session_id, std::uint8_t flow_step);

/// Position of each message within its flow.
namespace step {
inline constexpr std::uint8_t kAuthHello = 1;
inline constexpr std::uint8_t kAuthChallenge = 2;
inline constexpr std::uint8_t kAuthResponse = 3;
inline constexpr std::uint8_t kAuthConfig = 4;
inline constexpr std::uint8_t kAuthConfirm = 5;
inline constexpr std::uint8_t kCertRequest = 1;
inline constexpr std::uint8_t kCertResponse = 2;
inline constexpr std::uint8_t kCertAck = 3;
inline constexpr std::uint8_t kSessHello = 1;
inline constexpr std::uint8_t kSessChallenge = 2;
inline constexpr std::uint8_t kSessResponse = 3;
inline constexpr std::uint8_t kSessConfirm = 4;
}  // namespace step

/// Configuration delivered (sealed) in AuthConfig.
struct ConfigPayload {
  SessionId session_id;
  ec::AlgorithmId algorithm_id = ec::kP256Sha256;
  Bytes sed_public_key;  // encoded point
  DeviceId sed_id;

  Bytes encode() const;
  /// Validates the algorithm and that the key decodes to a non-identity point.
  static ConfigPayload decode(ByteView in);

  friend bool operator==(const ConfigPayload&, const ConfigPayload&) = default;
};

}  // namespace bmsauth::proto
