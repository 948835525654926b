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

#include "bmsauth/protocol.hpp"

#include <array>
#include <utility>

#include "bmsauth/error.hpp"

namespace bmsauth::proto {

namespace {

constexpr std::array<std::pair<MsgType, std::string_view>, 12> kMsgNames{{
    {MsgType::AuthHello, "AuthHello"},
    {MsgType::AuthChallenge, "AuthChallenge"},
    {MsgType::AuthResponse, "AuthResponse"},
    {MsgType::AuthConfig, "AuthConfig"},
    {MsgType::AuthConfirm, "AuthConfirm"},
    {MsgType::CertRequest, "CertRequest"},
    {MsgType::CertResponse, "CertResponse"},
    {MsgType::CertAck, "CertAck"},
    {MsgType::SessHello, "SessHello"},
    {MsgType::SessChallenge, "SessChallenge"},
    {MsgType::SessResponse, "SessResponse"},
    {MsgType::SessConfirm, "SessConfirm"},
}};

}  // namespace

std::string_view to_string(MsgType t) {
  for (const auto& [m, name] : kMsgNames) {
    if (m == t) return name;
  }
  return "Unknown";
}

std::optional<MsgType> msg_type_from_string(std::string_view name) {
  for (const auto& [m, n] : kMsgNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

bool is_known_msg_type(std::uint8_t v) { return v >= 0x01 && v <= 0x0C; }

bool is_known_field(std::uint8_t v) { return v >= 0x01 && v <= 0x09; }

ProtocolMessage& ProtocolMessage::add(FieldId id, ByteView value) {
  if (get(id)) throw Error(ErrorCode::DuplicateField, "field already present");
  payload.push_back(Field{id, Bytes(value.begin(), value.end())});
  return *this;
}

std::optional<ByteView> ProtocolMessage::get(FieldId id) const {
  for (const auto& f : payload) {
    if (f.id == id) return ByteView(f.value);
  }
  return std::nullopt;
}

ByteView ProtocolMessage::require(FieldId id) const {
  auto v = get(id);
  if (!v) {
    throw Error(ErrorCode::MissingField,
                "missing field " + std::to_string(static_cast<int>(id)) + " in " + std::string(to_string(msg_type)));
  }
  return *v;
}

Bytes frame(const ProtocolMessage& msg) {
  std::size_t payload_len = 0;
  for (const auto& f : msg.payload) {
    if (f.value.size() > 0xFFFF) throw Error(ErrorCode::Oversize, "field value exceeds 65535 bytes");
    payload_len += 3 + f.value.size();
  }
  if (payload_len > kMaxPayload) throw Error(ErrorCode::Oversize, "payload exceeds 64 KiB");

  Bytes out;
  out.reserve(kHeaderSize + payload_len);
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(msg.msg_type));
  append(out, msg.session_id.view());
  append_u32(out, static_cast<std::uint32_t>(payload_len));
  for (const auto& f : msg.payload) {
    out.push_back(static_cast<std::uint8_t>(f.id));
    append_u16(out, static_cast<std::uint16_t>(f.value.size()));
    append(out, f.value);
  }
  return out;
}

std::size_t frame_length_from_header(ByteView header) {
  if (header.size() < kHeaderSize) throw Error(ErrorCode::LengthMismatch, "truncated frame header", header.size());
  if (header[0] != kMagic0 || header[1] != kMagic1) throw Error(ErrorCode::BadMagic, "bad frame magic", 0);
  const std::uint32_t len = read_u32(header, 20);
  if (len > kMaxPayload) throw Error(ErrorCode::Oversize, "payload exceeds 64 KiB", 20);
  return kHeaderSize + len;
}

std::optional<MsgType> peek_msg_type(ByteView bytes) {
  if (bytes.size() < 4 || !is_known_msg_type(bytes[3])) return std::nullopt;
  return static_cast<MsgType>(bytes[3]);
}

ProtocolMessage parse(ByteView in) {
  if (in.size() < kHeaderSize) throw Error(ErrorCode::LengthMismatch, "truncated frame header", in.size());
  if (in[0] != kMagic0 || in[1] != kMagic1) throw Error(ErrorCode::BadMagic, "bad frame magic", 0);
  if (in[2] != kVersion) throw Error(ErrorCode::UnknownVersion, "unsupported frame version", 2);
  if (!is_known_msg_type(in[3])) throw Error(ErrorCode::UnknownMessageType, "unknown message type", 3);

  const std::uint32_t payload_len = read_u32(in, 20);
  if (payload_len > kMaxPayload) throw Error(ErrorCode::Oversize, "payload exceeds 64 KiB", 20);
  if (in.size() != kHeaderSize + payload_len) {
    throw Error(ErrorCode::LengthMismatch,
                in.size() < kHeaderSize + payload_len ? "payload underrun" : "bytes after payload",
                std::min(in.size(), kHeaderSize + payload_len));
  }

  ProtocolMessage msg(static_cast<MsgType>(in[3]), SessionId::from(in.subspan(kSessionIdOffset, 16)));
  std::size_t pos = kHeaderSize;
  while (pos < in.size()) {
    if (in.size() - pos < 3) throw Error(ErrorCode::LengthMismatch, "truncated field header", pos);
    const std::uint8_t id = in[pos];
    const std::uint16_t len = read_u16(in, pos + 1);
    if (!is_known_field(id)) throw Error(ErrorCode::UnknownField, "unknown field id", pos);
    if (in.size() - pos - 3 < len) throw Error(ErrorCode::LengthMismatch, "field value overruns payload", pos);
    const auto fid = static_cast<FieldId>(id);
    if (msg.get(fid)) throw Error(ErrorCode::DuplicateField, "duplicate field", pos);
    msg.payload.push_back(Field{fid, Bytes(in.begin() + static_cast<std::ptrdiff_t>(pos + 3),
                                            in.begin() + static_cast<std::ptrdiff_t>(pos + 3 + len))});
    pos += 3 + len;
  }
  return msg;
}

Bytes transcript_mac_header(MsgType msg_type, const SessionId& session_id, std::uint8_t flow_step) {
  Bytes out{'B', 'M', 'S', 'A', kVersion, static_cast<std::uint8_t>(msg_type), flow_step};
  append(out, session_id.view());
  return out;
}

Bytes ConfigPayload::encode() const {
  Bytes out;
  append(out, session_id.view());
  out.push_back(algorithm_id);
  append(out, sed_id.view());
  append_u16(out, static_cast<std::uint16_t>(sed_public_key.size()));
  append(out, sed_public_key);
  return out;
}

ConfigPayload ConfigPayload::decode(ByteView in) {
  constexpr std::size_t kFixed = 16 + 1 + 8 + 2;
  if (in.size() < kFixed) throw Error(ErrorCode::LengthMismatch, "config payload too short", in.size());
  ConfigPayload c;
  c.session_id = SessionId::from(in.subspan(0, 16));
  c.algorithm_id = in[16];
  c.sed_id = DeviceId::from(in.subspan(17, 8));
  const std::uint16_t key_len = read_u16(in, 25);
  if (in.size() != kFixed + key_len) throw Error(ErrorCode::LengthMismatch, "config key length mismatch", 25);
  c.sed_public_key.assign(in.begin() + kFixed, in.end());
  const ec::Point q = ec::decode_point(ec::curve_by_id(c.algorithm_id), c.sed_public_key);
  if (q.is_identity()) throw Error(ErrorCode::InvalidPointEncoding, "SED public key is the identity", kFixed);
  return c;
}

}  // namespace bmsauth::proto
