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

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/protocol.hpp"

namespace bmsauth::roles::detail {

/// MAC input: transcript header | frame of msg without its MacTag | extra.
/// In CertResponse the contribution S is left out: the requester's reconstruction
/// check already binds it, so a corrupted S surfaces as a certification failure.
inline Bytes mac_input(const proto::ProtocolMessage& msg, std::uint8_t step, ByteView extra) {
  proto::ProtocolMessage bare(msg.msg_type, msg.session_id);
  for (const auto& f : msg.payload) {
    if (f.id == proto::FieldId::MacTag) continue;
    if (f.id == proto::FieldId::Scalar && msg.msg_type == proto::MsgType::CertResponse) continue;
    bare.payload.push_back(f);
  }
  Bytes in = proto::transcript_mac_header(msg.msg_type, msg.session_id, step);
  append(in, proto::frame(bare));
  append(in, extra);
  return in;
}

inline void attach_mac(proto::ProtocolMessage& msg, const Key32& key, std::uint8_t step, ByteView extra = {}) {
  const crypto::Tag tag = crypto::mac(key, mac_input(msg, step, extra));
  msg.add(proto::FieldId::MacTag, tag.view());
}

/// Throws Error(MissingField) / Error(LengthMismatch) for a missing or short tag.
inline bool check_mac(const proto::ProtocolMessage& msg, const Key32& key, std::uint8_t step, ByteView extra = {}) {
  const auto tag = msg.require_fixed<crypto::kTagSize>(proto::FieldId::MacTag);
  return crypto::verify_mac(key.view(), mac_input(msg, step, extra), tag);
}

/// Associated header for sealed payloads.
inline Bytes seal_header(proto::MsgType type, const SessionId& sid, std::uint8_t step, ByteView extra = {}) {
  Bytes h = proto::transcript_mac_header(type, sid, step);
  append(h, extra);
  return h;
}

}  // namespace bmsauth::roles::detail
