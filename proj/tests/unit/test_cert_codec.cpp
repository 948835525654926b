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

#include <functional>

#include <gtest/gtest.h>

#include "bmsauth/cert_codec.hpp"
#include "bmsauth/error.hpp"
#include "golden.hpp"
#include "test_util.hpp"

namespace bmsauth::cert {
namespace {

using test_support::error_of;
using test_support::error_offset_of;

EncodedCertificate golden_toy() {
  CertMeta meta;
  meta.algorithm_id = ec::kToyF17Sha256;
  meta.valid_from = 0;
  meta.valid_to = 86400;
  return encode(SessionId{}, meta, ec::toy_curve().generator());
}

EncodedCertificate golden_p256() {
  CertMeta meta;
  meta.algorithm_id = ec::kP256Sha256;
  meta.issuer_id = DeviceId::from(from_hex("5ED0000000000001"));
  meta.subject_id = DeviceId::from(from_hex("0011223344556677"));
  meta.valid_from = 1'700'000'000;
  meta.valid_to = 1'702'592'000;
  return encode(SessionId::from(from_hex("000102030405060708090a0b0c0d0e0f")), meta, ec::p256().generator());
}

EncodedCertificate random_cert(EntropySource& rng) {
  const auto& curve = (rng.draw<1>().bytes[0] & 1) ? ec::p256() : ec::toy_curve();
  CertMeta meta;
  meta.algorithm_id = curve.algorithm_id();
  meta.issuer_id = rng.draw<8>();
  meta.subject_id = rng.draw<8>();
  const auto from = read_u64(rng.draw<8>().view(), 0) >> 1;
  meta.valid_from = from;
  meta.valid_to = from + 1 + (read_u32(rng.draw<4>().view(), 0));
  const auto sid = rng.draw<16>();
  return encode(sid, meta, ec::scalar_mul(ec::random_scalar(curve, rng), curve.generator()));
}

TEST(Golden, EncodeMatchesHandAssembledBytes) {
  const auto blocks = test_support::read_hex_blocks(test_support::golden_path());
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(to_hex(golden_toy().bytes()), to_hex(blocks[0]));
  EXPECT_EQ(to_hex(golden_p256().bytes()), to_hex(blocks[1]));
  EXPECT_EQ(blocks[0].size(), kFixedPrefixSize + 3);
  EXPECT_EQ(blocks[1].size(), kFixedPrefixSize + 65);
}

TEST(Golden, DecodeYieldsFields) {
  const auto blocks = test_support::read_hex_blocks(test_support::golden_path());
  ASSERT_EQ(blocks.size(), 2u);
  const auto toy = decode(blocks[0]);
  EXPECT_TRUE(toy.session_id.is_zero());
  EXPECT_EQ(toy.meta.algorithm_id, ec::kToyF17Sha256);
  EXPECT_EQ(toy.meta.valid_to, 86400u);
  EXPECT_EQ(toy.reconstruction_point, ec::toy_curve().generator());

  const auto p = decode(blocks[1]);
  EXPECT_EQ(to_hex(p.session_id.view()), "000102030405060708090a0b0c0d0e0f");
  EXPECT_EQ(to_hex(p.meta.issuer_id.view()), "5ed0000000000001");
  EXPECT_EQ(to_hex(p.meta.subject_id.view()), "0011223344556677");
  EXPECT_EQ(p.meta.valid_from, 1'700'000'000u);
  EXPECT_EQ(p.meta.valid_to, 1'702'592'000u);
  EXPECT_EQ(p.reconstruction_point, ec::p256().generator());
}

TEST(Codec, RandomRoundTrip) {
  SeededEntropy rng(21, "codec");
  for (int i = 0; i < 2000; ++i) {
    const auto c = random_cert(rng);
    const auto d = decode(c);
    EXPECT_EQ(encode(d.session_id, d.meta, d.reconstruction_point), c);
  }
}

TEST(Codec, IdentityPointEncodesAsOneByte) {
  CertMeta meta;
  meta.algorithm_id = ec::kToyF17Sha256;
  meta.valid_to = 1;
  const auto c = encode(SessionId{}, meta, ec::Point::identity(ec::toy_curve()));
  EXPECT_EQ(c.size(), kFixedPrefixSize + 1);
  EXPECT_TRUE(decode(c).reconstruction_point.is_identity());
}

TEST(Codec, EncodeRejectsBadInput) {
  CertMeta meta;
  meta.algorithm_id = ec::kToyF17Sha256;
  meta.valid_from = 5;
  meta.valid_to = 5;
  EXPECT_EQ(error_of([&] { encode(SessionId{}, meta, ec::toy_curve().generator()); }), ErrorCode::InvalidValidity);
  meta.valid_to = 6;
  EXPECT_EQ(error_of([&] { encode(SessionId{}, meta, ec::p256().generator()); }), ErrorCode::CurveMismatch);
  meta.algorithm_id = 0x33;
  EXPECT_EQ(error_of([&] { encode(SessionId{}, meta, ec::toy_curve().generator()); }), ErrorCode::UnknownAlgorithm);
}

struct Case {
  const char* name;
  std::function<Bytes(Bytes)> mutate;
  ErrorCode code;
  std::size_t offset;
};

TEST(Codec, DistinctErrorsWithOffsets) {
  const Bytes good = golden_toy().bytes();
  const std::vector<Case> cases = {
      {"short", [](Bytes b) { b.resize(20); return b; }, ErrorCode::LengthMismatch, 20},
      {"version", [](Bytes b) { b[0] = 2; return b; }, ErrorCode::UnknownVersion, 0},
      {"algorithm", [](Bytes b) { b[1] = 0x77; return b; }, ErrorCode::UnknownAlgorithm, 1},
      {"validity", [](Bytes b) { b[49] = 0; b[48] = 0; b[47] = 0; return b; }, ErrorCode::InvalidValidity, 34},
      {"tag", [](Bytes b) { b[50] = 0x02; return b; }, ErrorCode::InvalidPointEncoding, 50},
      {"truncated point", [](Bytes b) { b.pop_back(); return b; }, ErrorCode::LengthMismatch, 52},
      {"trailing", [](Bytes b) { b.push_back(0); return b; }, ErrorCode::TrailingGarbage, 53},
      {"off curve", [](Bytes b) { b[52] = 2; return b; }, ErrorCode::OffCurvePoint, 50},
      {"unreduced", [](Bytes b) { b[51] = 17; return b; }, ErrorCode::InvalidPointEncoding, 51},
      {"identity with tail", [](Bytes b) { b[50] = 0; return b; }, ErrorCode::TrailingGarbage, 51},
  };
  for (const auto& c : cases) {
    const Bytes bad = c.mutate(good);
    EXPECT_EQ(error_of([&] { decode(bad); }), c.code) << c.name;
    EXPECT_EQ(error_offset_of([&] { decode(bad); }), c.offset) << c.name;
  }
}

TEST(Codec, RandomBytesNeverCrash) {
  SeededEntropy rng(22, "fuzz");
  for (int i = 0; i < 10000; ++i) {
    Bytes b(rng.draw<1>().bytes[0] % 130);
    rng.fill(b);
    if (!b.empty()) b[0] = (i % 2) ? kCertVersion : b[0];
    if (b.size() > 1 && i % 3 == 0) b[1] = ec::kToyF17Sha256;
    try {
      const auto d = decode(b);
      EXPECT_EQ(encode(d.session_id, d.meta, d.reconstruction_point).bytes(), b);
    } catch (const Error&) {
    }
  }
}

TEST(Codec, SingleByteMutationsEitherRejectOrReencodeExactly) {
  const Bytes good = golden_p256().bytes();
  for (std::size_t i = 0; i < good.size(); ++i) {
    for (std::uint8_t mask : {0x01, 0x80, 0xFF}) {
      Bytes b = good;
      b[i] ^= mask;
      try {
        const auto d = decode(b);
        EXPECT_EQ(encode(d.session_id, d.meta, d.reconstruction_point).bytes(), b);
      } catch (const Error&) {
      }
    }
  }
}

TEST(Validity, HalfOpenWindow) {
  CertMeta m;
  m.valid_from = 10;
  m.valid_to = 20;
  EXPECT_FALSE(is_valid_at(m, 9));
  EXPECT_TRUE(is_valid_at(m, 10));
  EXPECT_TRUE(is_valid_at(m, 19));
  EXPECT_FALSE(is_valid_at(m, 20));
}

}  // namespace
}  // namespace bmsauth::cert
