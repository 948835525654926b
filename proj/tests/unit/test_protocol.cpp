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

#include <gtest/gtest.h>

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/error.hpp"
#include "bmsauth/protocol.hpp"
#include "test_util.hpp"

namespace bmsauth::proto {
namespace {

using test_support::error_of;
using test_support::error_offset_of;

ProtocolMessage sample(EntropySource& rng) {
  ProtocolMessage m(MsgType::AuthResponse, rng.draw<16>());
  m.add(FieldId::DeviceId, rng.draw<8>().view());
  m.add(FieldId::Nonce, rng.draw<16>().view());
  Bytes ct(48);
  rng.fill(ct);
  m.add(FieldId::Ciphertext, ct);
  m.add(FieldId::MacTag, rng.draw<32>().view());
  return m;
}

TEST(Frame, EmptyAuthHelloIsHeaderOnly) {
  const Bytes f = frame(ProtocolMessage(MsgType::AuthHello, SessionId{}));
  EXPECT_EQ(f.size(), kHeaderSize);
  EXPECT_EQ(to_hex(f), "b45a0101" + std::string(32, '0') + "00000000");
}

TEST(Frame, LayoutOfOneField) {
  ProtocolMessage m(MsgType::AuthChallenge, SessionId{});
  m.add(FieldId::Role, Bytes{0x01});
  const Bytes f = frame(m);
  EXPECT_EQ(to_hex(ByteView(f).subspan(20)), "00000004" "090001" "01");
  EXPECT_EQ(frame_length_from_header(f), f.size());
}

TEST(Frame, RoundTrip) {
  SeededEntropy rng(41);
  for (int i = 0; i < 200; ++i) {
    const auto m = sample(rng);
    const Bytes f = frame(m);
    EXPECT_EQ(parse(f), m);
    EXPECT_EQ(frame(parse(f)), f);
    EXPECT_EQ(peek_msg_type(f), MsgType::AuthResponse);
  }
}

TEST(Frame, OversizeBoundaries) {
  ProtocolMessage one(MsgType::CertResponse, SessionId{});
  one.add(FieldId::Certificate, Bytes(65536));
  EXPECT_EQ(error_of([&] { frame(one); }), ErrorCode::Oversize);

  ProtocolMessage big(MsgType::CertResponse, SessionId{});
  big.add(FieldId::Certificate, Bytes(65533));
  EXPECT_EQ(frame(big).size(), kHeaderSize + kMaxPayload);
  // 65537-byte payload: one over the limit.
  big.payload[0].value.push_back(0);
  EXPECT_EQ(error_of([&] { frame(big); }), ErrorCode::Oversize);
  big.payload[0].value.pop_back();
  big.add(FieldId::Scalar, Bytes{});
  EXPECT_EQ(error_of([&] { frame(big); }), ErrorCode::Oversize);
}

TEST(Message, FieldAccessors) {
  ProtocolMessage m(MsgType::AuthHello, SessionId{});
  m.add(FieldId::DeviceId, Bytes(8, 1));
  EXPECT_EQ(error_of([&] { m.add(FieldId::DeviceId, Bytes(8, 2)); }), ErrorCode::DuplicateField);
  EXPECT_EQ(m.require_fixed<8>(FieldId::DeviceId), DeviceId::from(Bytes(8, 1)));
  EXPECT_EQ(error_of([&] { m.require(FieldId::Nonce); }), ErrorCode::MissingField);
  EXPECT_EQ(error_of([&] { m.require_fixed<16>(FieldId::DeviceId); }), ErrorCode::LengthMismatch);
  EXPECT_FALSE(m.get(FieldId::Nonce).has_value());
}

TEST(Parse, ErrorsWithOffsets) {
  SeededEntropy rng(42);
  const Bytes good = frame(sample(rng));
  struct Case {
    const char* name;
    Bytes bytes;
    ErrorCode code;
    std::size_t offset;
  };
  auto with = [&](std::size_t i, std::uint8_t v) {
    Bytes b = good;
    b[i] = v;
    return b;
  };
  Bytes truncated(good.begin(), good.begin() + 10);
  Bytes trailing = good;
  trailing.push_back(0);
  Bytes short_payload(good.begin(), good.end() - 1);
  Bytes dup = good;
  {
    // Append a second DeviceId TLV and bump the payload length.
    const Bytes extra{0x01, 0x00, 0x08, 1, 2, 3, 4, 5, 6, 7, 8};
    append(dup, extra);
    const std::uint32_t len = read_u32(dup, 20) + static_cast<std::uint32_t>(extra.size());
    Bytes l;
    append_u32(l, len);
    std::copy(l.begin(), l.end(), dup.begin() + 20);
  }
  const std::vector<Case> cases = {
      {"truncated header", truncated, ErrorCode::LengthMismatch, 10},
      {"magic", with(0, 0x00), ErrorCode::BadMagic, 0},
      {"version", with(2, 0x02), ErrorCode::UnknownVersion, 2},
      {"type", with(3, 0x0D), ErrorCode::UnknownMessageType, 3},
      {"type zero", with(3, 0x00), ErrorCode::UnknownMessageType, 3},
      {"oversize", with(21, 0x02), ErrorCode::Oversize, 20},
      {"unknown field", with(24, 0x0A), ErrorCode::UnknownField, 24},
      {"field overrun", with(25, 0x01), ErrorCode::LengthMismatch, 24},
      {"duplicate", dup, ErrorCode::DuplicateField, good.size()},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(error_of([&] { parse(c.bytes); }), c.code) << c.name;
    EXPECT_EQ(error_offset_of([&] { parse(c.bytes); }), c.offset) << c.name;
  }
  EXPECT_EQ(error_of([&] { parse(trailing); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(error_of([&] { parse(short_payload); }), ErrorCode::LengthMismatch);
}

TEST(Parse, FuzzNeverCrashes) {
  SeededEntropy rng(43, "fuzz");
  const Bytes good = frame(sample(rng));
  for (int i = 0; i < 20000; ++i) {
    Bytes b;
    if (i % 2 == 0) {
      b.resize(rng.draw<1>().bytes[0] % 120);
      rng.fill(b);
      if (b.size() >= 2 && i % 4 == 0) {
        b[0] = kMagic0;
        b[1] = kMagic1;
      }
    } else {
      b = good;
      const auto pos = read_u16(rng.draw<2>().view(), 0) % b.size();
      b[pos] ^= static_cast<std::uint8_t>(rng.draw<1>().bytes[0] | 1);
      if (i % 3 == 0) b.resize(read_u16(rng.draw<2>().view(), 0) % (b.size() + 1));
    }
    try {
      const auto m = parse(b);
      EXPECT_EQ(frame(m), b);
    } catch (const Error&) {
    }
  }
}

TEST(Names, MessageTypes) {
  for (std::uint8_t v = 1; v <= 0x0C; ++v) {
    ASSERT_TRUE(is_known_msg_type(v));
    const auto t = static_cast<MsgType>(v);
    EXPECT_EQ(msg_type_from_string(to_string(t)), t);
  }
  EXPECT_FALSE(is_known_msg_type(0));
  EXPECT_FALSE(is_known_msg_type(0x0D));
  EXPECT_TRUE(is_known_field(0x09));
  EXPECT_FALSE(is_known_field(0x0A));
}

TEST(TranscriptHeader, BindsTypeSessionAndStep) {
  SessionId a{}, b{};
  b.bytes[0] = 1;
  const Bytes h = transcript_mac_header(MsgType::AuthResponse, a, step::kAuthResponse);
  EXPECT_EQ(h, transcript_mac_header(MsgType::AuthResponse, a, step::kAuthResponse));
  EXPECT_NE(h, transcript_mac_header(MsgType::AuthResponse, a, step::kAuthChallenge));
  EXPECT_NE(h, transcript_mac_header(MsgType::AuthConfig, a, step::kAuthResponse));
  EXPECT_NE(h, transcript_mac_header(MsgType::AuthResponse, b, step::kAuthResponse));
  EXPECT_EQ(to_hex(ByteView(h).first(4)), "424d5341");
}

TEST(TranscriptHeader, SealAtStepThreeFailsToOpenAtStepTwo) {
  SeededEntropy rng(44);
  const auto keys = crypto::provision_keys(Key32(rng.draw<32>().view()));
  const SessionId sid{};
  const auto sealed = crypto::seal(keys, transcript_mac_header(MsgType::AuthResponse, sid, step::kAuthResponse),
                                   Bytes(64, 7), rng);
  EXPECT_EQ(error_of([&] {
              crypto::open(keys, transcript_mac_header(MsgType::AuthResponse, sid, step::kAuthChallenge), sealed);
            }),
            ErrorCode::AuthenticationFailure);
  EXPECT_EQ(crypto::open(keys, transcript_mac_header(MsgType::AuthResponse, sid, step::kAuthResponse), sealed),
            Bytes(64, 7));
}

TEST(ConfigPayload, RoundTripAndValidation) {
  ConfigPayload c;
  c.session_id.bytes[3] = 9;
  c.algorithm_id = ec::kToyF17Sha256;
  c.sed_public_key = ec::encode_point(ec::toy_curve().generator());
  c.sed_id = DeviceId::from(from_hex("5ED0000000000001"));
  const Bytes e = c.encode();
  EXPECT_EQ(ConfigPayload::decode(e), c);

  ConfigPayload identity = c;
  identity.sed_public_key = Bytes{0x00};
  EXPECT_EQ(error_of([&] { ConfigPayload::decode(identity.encode()); }), ErrorCode::InvalidPointEncoding);
  ConfigPayload alg = c;
  alg.algorithm_id = 0x55;
  EXPECT_EQ(error_of([&] { ConfigPayload::decode(alg.encode()); }), ErrorCode::UnknownAlgorithm);
  Bytes trunc = e;
  trunc.pop_back();
  EXPECT_EQ(error_of([&] { ConfigPayload::decode(trunc); }), ErrorCode::LengthMismatch);
  Bytes off = e;
  off.back() ^= 0x03;
  EXPECT_EQ(error_of([&] { ConfigPayload::decode(off); }), ErrorCode::OffCurvePoint);
}

}  // namespace
}  // namespace bmsauth::proto
