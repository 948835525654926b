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
#include "bmsauth/ecqv.hpp"
#include "bmsauth/error.hpp"
#include "test_util.hpp"
#include "toy_oracle.hpp"

namespace bmsauth::ecqv {
namespace {

using test_support::error_of;

CertMeta toy_meta() {
  CertMeta m;
  m.algorithm_id = ec::kToyF17Sha256;
  m.issuer_id = DeviceId::from(from_hex("5ED0000000000001"));
  m.subject_id = DeviceId::from(from_hex("0000000000000B35"));
  m.valid_from = 100;
  m.valid_to = 200;
  return m;
}

/// Certificate bytes assembled field by field, with U from the oracle.
Bytes oracle_cert_bytes(const SessionId& sid, const CertMeta& m, const toy_oracle::Pt& u) {
  Bytes b{0x01, m.algorithm_id};
  append(b, sid.view());
  append(b, m.issuer_id.view());
  append(b, m.subject_id.view());
  append_u64(b, m.valid_from);
  append_u64(b, m.valid_to);
  if (u.inf) {
    b.push_back(0x00);
  } else {
    b.push_back(0x04);
    b.push_back(static_cast<std::uint8_t>(u.x));
    b.push_back(static_cast<std::uint8_t>(u.y));
  }
  return b;
}

ec::Scalar toy(int v) { return ec::Scalar(ec::toy_curve(), v); }

TEST(CertRequest, ToyTableMatchesOracle) {
  for (int t = 1; t < 19; ++t) {
    const auto req = cert_request_from(toy(t));
    const auto expected = toy_oracle::mul(t, toy_oracle::kG);
    ASSERT_FALSE(req.p_req.is_identity());
    EXPECT_EQ(req.p_req.x(), expected.x);
    EXPECT_EQ(req.p_req.y(), expected.y);
  }
  EXPECT_EQ(error_of([] { cert_request_from(toy(0)); }), ErrorCode::InvalidScalar);
}

TEST(CertRequest, RandomIsOnCurveAndNonIdentity) {
  SeededEntropy rng(31);
  for (int i = 0; i < 50; ++i) {
    const auto req = gen_cert_request(ec::p256(), rng);
    EXPECT_FALSE(req.t.is_zero());
    EXPECT_EQ(req.p_req, ec::scalar_mul(req.t, ec::p256().generator()));
  }
}

TEST(HashToScalar, MatchesByteWiseReduction) {
  SeededEntropy rng(32);
  for (int i = 0; i < 200; ++i) {
    Bytes data(static_cast<std::size_t>(i));
    rng.fill(data);
    const Bytes digest = crypto::sha256(data);
    EXPECT_EQ(hash_to_scalar(ec::toy_curve(), data).value(), toy_oracle::reduce_mod_n(digest));
  }
}

TEST(Issue, PinnedToyExample) {
  // ca_private = 7, t = 3, k = 5.
  const SessionId sid{};
  const CertMeta meta = toy_meta();
  const auto req = cert_request_from(toy(3));
  const auto issued = issue_with_ephemeral(toy(7), sid, req.p_req, meta, toy(5));

  const auto u = toy_oracle::mul(8, toy_oracle::kG);
  const Bytes cert = oracle_cert_bytes(sid, meta, u);
  EXPECT_EQ(to_hex(issued.cert.bytes()), to_hex(cert));
  const int e = toy_oracle::reduce_mod_n(crypto::sha256(cert));
  ASSERT_NE(e, 0);
  EXPECT_EQ(issued.contribution.s.value(), (e * 5 + 7) % 19);

  const auto ca_pub = ec::scalar_mul(toy(7), ec::toy_curve().generator());
  const auto keys = reconstruct_own_keys(req, issued.contribution, issued.cert, ca_pub);
  ASSERT_TRUE(keys.has_value());
  const int prk = (e * 3 + (e * 5 + 7)) % 19;
  EXPECT_EQ(keys->prk.value(), prk);
  EXPECT_EQ(keys->pub, ec::scalar_mul(keys->prk, ec::toy_curve().generator()));
  EXPECT_EQ(reconstruct_peer_public(issued.cert, ca_pub), keys->pub);
}

TEST(Issue, ExhaustiveToySoundness) {
  const SessionId sid{};
  const CertMeta meta = toy_meta();
  const auto& g = ec::toy_curve().generator();
  int issued_count = 0, refused = 0;
  for (int t = 1; t < 19; ++t) {
    const auto req = cert_request_from(toy(t));
    for (int k = 1; k < 19; ++k) {
      for (int d = 1; d < 19; ++d) {
        const Bytes cert = oracle_cert_bytes(sid, meta, toy_oracle::mul(t + k, toy_oracle::kG));
        const int e = toy_oracle::reduce_mod_n(crypto::sha256(cert));
        if (e == 0) {
          EXPECT_EQ(error_of([&] { issue_with_ephemeral(toy(d), sid, req.p_req, meta, toy(k)); }),
                    ErrorCode::DegenerateHash);
          ++refused;
          continue;
        }
        const auto issued = issue_with_ephemeral(toy(d), sid, req.p_req, meta, toy(k));
        ASSERT_EQ(issued.cert.bytes(), cert);
        const int s = (e * k + d) % 19;
        ASSERT_EQ(issued.contribution.s.value(), s);
        const int prk = (e * t + s) % 19;
        const auto ca_pub = ec::scalar_mul(toy(d), g);
        EXPECT_EQ(reconstruct_peer_public(issued.cert, ca_pub), ec::scalar_mul(toy(prk), g));
        const auto keys = reconstruct_own_keys(req, issued.contribution, issued.cert, ca_pub);
        if (prk == 0) {
          // Identity public key: refused by the requester.
          EXPECT_FALSE(keys.has_value());
        } else {
          ASSERT_TRUE(keys.has_value());
          EXPECT_EQ(keys->prk.value(), prk);
        }
        ++issued_count;
      }
    }
  }
  EXPECT_EQ(issued_count + refused, 18 * 18 * 18);
  EXPECT_GT(issued_count, 0);
}

TEST(Issue, RandomP256Accepts) {
  SeededEntropy rng(33, "p256");
  const auto& c = ec::p256();
  CertMeta meta;
  meta.issuer_id = rng.draw<8>();
  meta.valid_from = 1;
  meta.valid_to = 2;
  for (int i = 0; i < 25; ++i) {
    const auto d = ec::random_scalar(c, rng);
    const auto ca_pub = ec::scalar_mul(d, c.generator());
    meta.subject_id = rng.draw<8>();
    const auto req = gen_cert_request(c, rng);
    const auto issued = ca_issue(d, rng.draw<16>(), req.p_req, meta, rng);
    const auto keys = reconstruct_own_keys(req, issued.contribution, issued.cert, ca_pub);
    ASSERT_TRUE(keys.has_value());
    EXPECT_EQ(reconstruct_peer_public(issued.cert, ca_pub), keys->pub);
  }
}

TEST(Issue, RejectsIdentityAndMismatchedCurves) {
  const CertMeta meta = toy_meta();
  EXPECT_EQ(error_of([&] {
              issue_with_ephemeral(toy(7), {}, ec::Point::identity(ec::toy_curve()), meta, toy(5));
            }),
            ErrorCode::InvalidParameter);
  EXPECT_EQ(error_of([&] { issue_with_ephemeral(toy(7), {}, ec::p256().generator(), meta, toy(5)); }),
            ErrorCode::CurveMismatch);
}

TEST(Issue, CaIssueGivesUpOnExhaustedEntropy) {
  FailingEntropy rng;
  const auto req = cert_request_from(toy(3));
  EXPECT_EQ(error_of([&] { ca_issue(toy(7), {}, req.p_req, toy_meta(), rng); }), ErrorCode::EntropyFailure);
}

TEST(Issue, CaIssueNeverReturnsDegenerateOnToy) {
  SeededEntropy rng(34, "toy");
  const CertMeta meta = toy_meta();
  for (int i = 0; i < 500; ++i) {
    const auto req = gen_cert_request(ec::toy_curve(), rng);
    try {
      const auto issued = ca_issue(toy(7), rng.draw<16>(), req.p_req, meta, rng);
      EXPECT_FALSE(hash_to_scalar(ec::toy_curve(), issued.cert.view()).is_zero());
      EXPECT_FALSE(cert::decode(issued.cert).reconstruction_point.is_identity());
    } catch (const Error& e) {
      // Four consecutive degenerate draws: possible on a 19-element group, never on P-256.
      EXPECT_EQ(e.code(), ErrorCode::DegenerateHash);
    }
  }
}

class Tampering : public ::testing::Test {
 protected:
  void SetUp() override {
    SeededEntropy rng(35, "tamper");
    const auto& c = ec::p256();
    d_ = ec::random_scalar(c, rng);
    ca_pub_ = ec::scalar_mul(*d_, c.generator());
    CertMeta meta;
    meta.issuer_id = rng.draw<8>();
    meta.subject_id = rng.draw<8>();
    meta.valid_from = 10;
    meta.valid_to = 20;
    req_ = gen_cert_request(c, rng);
    issued_ = ca_issue(*d_, rng.draw<16>(), req_->p_req, meta, rng);
  }
  std::optional<ec::Scalar> d_;
  std::optional<ec::Point> ca_pub_;
  std::optional<CertRequestSecret> req_;
  std::optional<IssuedCertificate> issued_;
};

TEST_F(Tampering, HonestAccepts) {
  EXPECT_TRUE(reconstruct_own_keys(*req_, issued_->contribution, issued_->cert, *ca_pub_).has_value());
}

TEST_F(Tampering, EveryCertByteFlipRejected) {
  const Bytes good = issued_->cert.bytes();
  for (std::size_t i = 0; i < good.size(); ++i) {
    Bytes b = good;
    b[i] ^= 0x01;
    std::optional<KeyPair> keys;
    try {
      keys = reconstruct_own_keys(*req_, issued_->contribution, EncodedCertificate::from_bytes(b), *ca_pub_);
    } catch (const Error&) {
    }
    EXPECT_FALSE(keys.has_value()) << "byte " << i;
  }
}

TEST_F(Tampering, EveryScalarByteFlipRejected) {
  const Bytes s = ec::encode_scalar(issued_->contribution.s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    Bytes b = s;
    b[i] ^= 0x01;
    const auto bad = ec::Scalar::reduce(ec::p256(), ec::mpz_from_bytes(b));
    EXPECT_FALSE(reconstruct_own_keys(*req_, PrivateKeyContribution{bad}, issued_->cert, *ca_pub_).has_value());
  }
}

TEST_F(Tampering, WrongCaPublicGivesDifferentKey) {
  const auto other = ec::scalar_mul(ec::Scalar::reduce(ec::p256(), d_->value() + 1), ec::p256().generator());
  const auto honest = reconstruct_own_keys(*req_, issued_->contribution, issued_->cert, *ca_pub_);
  ASSERT_TRUE(honest.has_value());
  EXPECT_NE(reconstruct_peer_public(issued_->cert, other), honest->pub);
  EXPECT_FALSE(reconstruct_own_keys(*req_, issued_->contribution, issued_->cert, other).has_value());
}

TEST_F(Tampering, UndecodableCertificateThrowsCodecError) {
  Bytes b = issued_->cert.bytes();
  b[0] = 9;
  EXPECT_EQ(error_of([&] { reconstruct_peer_public(EncodedCertificate::from_bytes(b), *ca_pub_); }),
            ErrorCode::UnknownVersion);
}

}  // namespace
}  // namespace bmsauth::ecqv
