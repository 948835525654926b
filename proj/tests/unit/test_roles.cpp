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

#include <set>

#include <gtest/gtest.h>

#include "bmsauth/error.hpp"
#include "bmsauth/session.hpp"
#include "role_rig.hpp"
#include "test_util.hpp"

namespace bmsauth::roles {
namespace {

using proto::FieldId;
using proto::MsgType;
using test_support::error_of;
using test_support::flip_field;
using test_support::of_type;
using test_support::Rig;

TEST(DeviceAuth, HappyPath) {
  Rig rig(1);
  auto& bms = rig.add("bms");
  EXPECT_EQ(bms.keys().epoch, 0u);
  ASSERT_TRUE(rig.auth("bms"));
  EXPECT_EQ(bms.keys().epoch, 1u);
  EXPECT_EQ(rig.rec("bms").keys, bms.keys());
  ASSERT_TRUE(bms.config().has_value());
  EXPECT_EQ(bms.config()->session_id, rig.rec("bms").session_id);
  EXPECT_FALSE(bms.config()->session_id.is_zero());
  EXPECT_EQ(bms.config()->sed_id, rig.sed().config().sed_id);
  EXPECT_EQ(ec::decode_point(ec::p256(), bms.config()->sed_public_key), rig.sed().ca_public());
  EXPECT_EQ(of_type(rig.sent_up, MsgType::AuthHello).size(), 1u);
  EXPECT_EQ(of_type(rig.sent_down, MsgType::AuthChallenge).size(), 1u);
  EXPECT_EQ(of_type(rig.sent_up, MsgType::AuthResponse).size(), 1u);
  EXPECT_EQ(of_type(rig.sent_down, MsgType::AuthConfig).size(), 1u);
  EXPECT_EQ(of_type(rig.sent_up, MsgType::AuthConfirm).size(), 1u);
}

TEST(DeviceAuth, ConsecutiveCyclesAdvanceEpochsInStep) {
  Rig rig(2);
  auto& bms = rig.add("bms");
  std::set<SessionId> sids;
  for (std::uint64_t epoch = 1; epoch <= 3; ++epoch) {
    ASSERT_TRUE(rig.auth("bms"));
    EXPECT_EQ(bms.keys().epoch, epoch);
    EXPECT_EQ(rig.rec("bms").keys, bms.keys());
    sids.insert(rig.rec("bms").session_id);
  }
  EXPECT_EQ(sids.size(), 3u);
}

TEST(DeviceAuth, TamperedConfigAbortsWithoutRatchet) {
  Rig rig(3);
  auto& bms = rig.add("bms");
  const auto before = bms.keys();
  rig.filter = [](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (!up && proto::peek_msg_type(f) == MsgType::AuthConfig) return flip_field(f, FieldId::Ciphertext, 20, 0x40);
    return f;
  };
  EXPECT_FALSE(rig.auth("bms"));
  EXPECT_EQ(bms.keys(), before);
  EXPECT_EQ(bms.state(), DeviceState::Idle);
  EXPECT_EQ(Rig::last_error(bms), ErrorCode::AuthenticationFailure);
  EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Unauthenticated);
  EXPECT_EQ(rig.rec("bms").keys.epoch, 0u);

  rig.filter = nullptr;
  ASSERT_TRUE(rig.auth("bms"));
  EXPECT_EQ(bms.keys().epoch, 1u);
}

TEST(DeviceAuth, LostConfirmRecoversOnNextAttempt) {
  Rig rig(4);
  auto& bms = rig.add("bms");
  rig.filter = [](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (up && proto::peek_msg_type(f) == MsgType::AuthConfirm) return std::nullopt;
    return f;
  };
  rig.exchange(bms, bms.start_auth());
  EXPECT_EQ(bms.keys().epoch, 1u);
  EXPECT_EQ(rig.rec("bms").keys.epoch, 0u);
  EXPECT_TRUE(rig.rec("bms").pending_ratchet.has_value());

  rig.filter = nullptr;
  ASSERT_TRUE(rig.auth("bms"));
  EXPECT_EQ(bms.keys().epoch, 2u);
  EXPECT_EQ(rig.rec("bms").keys, bms.keys());
}

TEST(DeviceAuth, StaleKeysRejected) {
  Rig rig(5);
  auto& bms = rig.add("bms");
  const auto epoch0 = bms.keys();
  ASSERT_TRUE(rig.auth("bms"));
  bms.set_keys(epoch0);
  EXPECT_FALSE(rig.auth("bms"));
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::AuthenticationFailure);
  EXPECT_EQ(rig.rec("bms").keys.epoch, 1u);
}

TEST(DeviceAuth, StolenEpochKeysFailAfterNextCycle) {
  Rig rig(6);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  const auto stolen = bms.keys();
  ASSERT_TRUE(rig.auth("bms"));
  // A clone claims the victim's identity with the epoch-1 keys.
  DeviceIdentity victim = bms.identity();
  SeededEntropy rng(6, "thief");
  DeviceNode clone(victim, stolen, rng, [&] { return rig.now; });
  rig.exchange(clone, clone.start_auth());
  EXPECT_NE(clone.state(), DeviceState::Configured);
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::AuthenticationFailure);
}

TEST(DeviceAuth, ReplayedResponseRejected) {
  Rig rig(7);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  const Bytes old_response = of_type(rig.sent_up, MsgType::AuthResponse).back();
  rig.sed().on_frame(old_response);
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::Replay);
  // Also in a later cycle, after a fresh challenge is outstanding.
  rig.sed().on_frame(bms.start_auth());
  EXPECT_TRUE(rig.sed().on_frame(old_response).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::Replay);
}

TEST(DeviceAuth, ResponseToSupersededChallengeRejected) {
  Rig rig(8);
  auto& bms = rig.add("bms");
  std::optional<Bytes> held;
  rig.filter = [&](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (up && proto::peek_msg_type(f) == MsgType::AuthResponse) {
      held = f;
      return std::nullopt;
    }
    return f;
  };
  rig.exchange(bms, bms.start_auth());
  ASSERT_TRUE(held.has_value());
  rig.filter = nullptr;
  // A second hello replaces the outstanding challenge.
  ASSERT_EQ(rig.sed().on_frame(bms.start_auth()).size(), 1u);
  EXPECT_TRUE(rig.sed().on_frame(*held).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::NonceMismatch);
  EXPECT_TRUE(rig.auth("bms"));
}

TEST(DeviceAuth, TamperedResponseRejected) {
  for (std::size_t field = 0; field < 3; ++field) {
    Rig rig(9);
    rig.add("bms");
    rig.filter = [field](bool up, const Bytes& f) -> std::optional<Bytes> {
      if (up && proto::peek_msg_type(f) == MsgType::AuthResponse) {
        const FieldId id = field == 0 ? FieldId::Ciphertext : field == 1 ? FieldId::MacTag : FieldId::Nonce;
        return flip_field(f, id, 3, 0x01);
      }
      return f;
    };
    EXPECT_FALSE(rig.auth("bms"));
    const auto err = rig.last_sed_error();
    EXPECT_TRUE(err == ErrorCode::AuthenticationFailure || err == ErrorCode::NonceMismatch) << field;
    EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Unauthenticated);
  }
}

TEST(DeviceAuth, UnknownDeviceDroppedSilently) {
  Rig rig(10);
  auto& rogue = rig.add("rogue", Role::Bms, false);
  EXPECT_TRUE(rig.sed().on_frame(rogue.start_auth()).empty());
  ASSERT_FALSE(rig.sed().events().empty());
  EXPECT_EQ(rig.sed().events().back().kind, EventKind::Dropped);
  EXPECT_EQ(rig.sed().events().back().error, ErrorCode::UnknownDevice);
}

TEST(DeviceAuth, RoleMismatchRejected) {
  Rig rig(11);
  rig.add("cu", Role::ControlUnit);
  auto id = rig.identity("cu", Role::Bms);
  SeededEntropy rng(11, "liar");
  DeviceNode liar(id, rng, [&] { return rig.now; });
  EXPECT_TRUE(rig.sed().on_frame(liar.start_auth()).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::UnexpectedMessage);
}

TEST(DeviceAuth, RevokedDeviceDropped) {
  Rig rig(12);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  rig.sed().revoke(bms.identity().device_id);
  EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Revoked);
  EXPECT_FALSE(rig.auth("bms"));
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::UnknownDevice);
  EXPECT_EQ(error_of([&] { rig.sed().revoke(DeviceId{}); }), ErrorCode::UnknownDevice);
}

TEST(DeviceAuth, RatchetDisabledKeepsEpoch) {
  Rig rig(13, ec::kP256Sha256, false);
  auto& bms = rig.add("bms");
  bms.set_ratchet_enabled(false);
  const auto k0 = bms.keys();
  ASSERT_TRUE(rig.auth("bms"));
  ASSERT_TRUE(rig.auth("bms"));
  EXPECT_EQ(bms.keys(), k0);
  EXPECT_EQ(rig.rec("bms").keys, k0);
  EXPECT_FALSE(rig.records.back().get(RecordField::Nonce).has_value());
}

TEST(Certification, HappyPath) {
  Rig rig(20);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  ASSERT_TRUE(rig.cert("bms"));
  ASSERT_TRUE(bms.credentials().has_value());
  const auto& creds = *bms.credentials();
  EXPECT_EQ(creds.key_pair.pub, ec::scalar_mul(creds.key_pair.prk, ec::p256().generator()));
  EXPECT_EQ(ecqv::reconstruct_peer_public(creds.cert, rig.sed().ca_public()), creds.key_pair.pub);
  ASSERT_TRUE(rig.rec("bms").cert.has_value());
  EXPECT_EQ(*rig.rec("bms").cert, creds.cert);
  const auto decoded = cert::decode(creds.cert);
  EXPECT_EQ(decoded.session_id, rig.rec("bms").session_id);
  EXPECT_EQ(decoded.meta.subject_id, bms.identity().device_id);
  EXPECT_EQ(decoded.meta.issuer_id, rig.sed().config().sed_id);
  EXPECT_EQ(decoded.meta.valid_from, rig.now);
}

TEST(Certification, ToyCurveFlow) {
  Rig rig(21, ec::kToyF17Sha256);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  // Toy issuance can fail on degenerate draws; a retry with fresh randomness succeeds.
  bool ok = false;
  for (int i = 0; i < 5 && !ok; ++i) ok = rig.cert("bms");
  EXPECT_TRUE(ok);
  EXPECT_EQ(bms.credentials()->key_pair.pub.curve().algorithm_id(), ec::kToyF17Sha256);
}

TEST(Certification, RequiresConfiguredDevice) {
  Rig rig(22);
  auto& bms = rig.add("bms");
  EXPECT_EQ(error_of([&] { bms.start_cert(); }), ErrorCode::UnexpectedMessage);
}

TEST(Certification, CorruptedScalarFailsReconstruction) {
  Rig rig(23);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  rig.filter = [](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (!up && proto::peek_msg_type(f) == MsgType::CertResponse) return flip_field(f, FieldId::Scalar, 31, 0x01);
    return f;
  };
  EXPECT_FALSE(rig.cert("bms"));
  EXPECT_EQ(Rig::last_error(bms), ErrorCode::CertificationFailed);
  EXPECT_EQ(bms.state(), DeviceState::Configured);
  EXPECT_FALSE(bms.credentials().has_value());
  EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Authenticated);

  rig.filter = nullptr;
  EXPECT_TRUE(rig.cert("bms"));
}

TEST(Certification, CorruptedCertificateFailsMac) {
  Rig rig(24);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  rig.filter = [](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (!up && proto::peek_msg_type(f) == MsgType::CertResponse) return flip_field(f, FieldId::Certificate, 60, 0x01);
    return f;
  };
  EXPECT_FALSE(rig.cert("bms"));
  EXPECT_EQ(Rig::last_error(bms), ErrorCode::AuthenticationFailure);
}

TEST(Certification, ReplayedRequestRejected) {
  Rig rig(25);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  const Bytes req = bms.start_cert();
  EXPECT_EQ(rig.sed().on_frame(req).size(), 1u);
  EXPECT_TRUE(rig.sed().on_frame(req).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::Replay);
}

TEST(Certification, StaleSessionIdDropped) {
  Rig rig(26);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  const Bytes old_req = bms.start_cert();
  ASSERT_TRUE(rig.auth("bms"));
  EXPECT_TRUE(rig.sed().on_frame(old_req).empty());
  EXPECT_EQ(rig.sed().events().back().kind, EventKind::Dropped);
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::UnknownDevice);
}

TEST(Certification, SplicedSessionIdRejected) {
  Rig rig(27);
  auto& a = rig.add("a");
  auto& b = rig.add("b");
  ASSERT_TRUE(rig.auth("a"));
  ASSERT_TRUE(rig.auth("b"));
  auto msg = proto::parse(a.start_cert());
  msg.session_id = b.config()->session_id;
  EXPECT_TRUE(rig.sed().on_frame(proto::frame(msg)).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::AuthenticationFailure);
}

TEST(Certification, TamperedAckRejected) {
  Rig rig(28);
  rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  rig.filter = [](bool up, const Bytes& f) -> std::optional<Bytes> {
    if (up && proto::peek_msg_type(f) == MsgType::CertAck) return flip_field(f, FieldId::MacTag, 0, 0x80);
    return f;
  };
  EXPECT_FALSE(rig.cert("bms"));
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::AuthenticationFailure);
  EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Authenticated);
}

TEST(Certification, ThreeInterleavedDevices) {
  Rig rig(29);
  std::vector<std::string> names{"bms-1", "bms-2", "cu"};
  for (const auto& n : names) rig.add(n, n == "cu" ? Role::ControlUnit : Role::Bms);

  // Round-robin: every device's next frame goes out before any device advances twice.
  auto run_interleaved = [&](bool cert_phase) {
    std::map<std::string, std::optional<Bytes>> next;
    for (const auto& n : names) next[n] = cert_phase ? rig.dev(n).start_cert() : rig.dev(n).start_auth();
    bool any = true;
    while (any) {
      any = false;
      for (const auto& n : names) {
        if (!next[n]) continue;
        any = true;
        auto replies = rig.sed().on_frame(*next[n]);
        next[n].reset();
        for (const auto& r : replies) next[n] = rig.dev(n).on_frame(r);
      }
    }
  };
  run_interleaved(false);
  run_interleaved(true);
  std::set<SessionId> sids;
  for (const auto& n : names) {
    EXPECT_EQ(rig.dev(n).state(), DeviceState::Certified) << n;
    EXPECT_EQ(rig.rec(n).status, DeviceStatus::Certified) << n;
    sids.insert(rig.rec(n).session_id);
  }
  EXPECT_EQ(sids.size(), 3u);
}

TEST(Recertify, ExpiryIssuesFreshCertificate) {
  Rig rig(30);
  auto& bms = rig.add("bms");
  auto& cu = rig.add("cu", Role::ControlUnit);
  for (const char* n : {"bms", "cu"}) {
    ASSERT_TRUE(rig.auth(n));
    ASSERT_TRUE(rig.cert(n));
  }
  const auto old_creds = *bms.credentials();
  rig.now += rig.sed().config().cert_lifetime + 1;

  SeededEntropy ra(30, "a"), rb(30, "b");
  auto expired = establish_session(*cu.credentials(), old_creds, ra, rb, [&] { return rig.now; });
  EXPECT_FALSE(expired.ok);
  EXPECT_TRUE(expired.initiator_error == ErrorCode::Expired || expired.responder_error == ErrorCode::Expired);

  for (const char* n : {"bms", "cu"}) {
    rig.sed().recertify(rig.dev(n).identity().device_id, RecertTrigger::Expiry);
    EXPECT_EQ(rig.rec(n).status, DeviceStatus::Authenticated);
    ASSERT_TRUE(rig.cert(n));
  }
  EXPECT_NE(bms.credentials()->cert, old_creds.cert);
  EXPECT_EQ(rig.rec("bms").superseded.size(), 1u);
  EXPECT_EQ(rig.rec("bms").superseded.front(), old_creds.cert);
  auto fresh = establish_session(*cu.credentials(), *bms.credentials(), ra, rb, [&] { return rig.now; });
  EXPECT_TRUE(fresh.ok);
  auto stale = establish_session(*cu.credentials(), old_creds, ra, rb, [&] { return rig.now; });
  EXPECT_FALSE(stale.ok);
}

TEST(Recertify, ConfigChangeRequiresFullAuthentication) {
  Rig rig(31);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  ASSERT_TRUE(rig.cert("bms"));
  rig.sed().recertify(bms.identity().device_id, RecertTrigger::ConfigChange);
  EXPECT_EQ(rig.rec("bms").status, DeviceStatus::Unauthenticated);
  EXPECT_FALSE(rig.cert("bms"));
  ASSERT_TRUE(rig.auth("bms"));
  ASSERT_TRUE(rig.cert("bms"));
  EXPECT_EQ(rig.records.back().kind, RecordKind::Certified);
}

TEST(Recertify, NewDeviceProvisionsUnknownId) {
  Rig rig(32);
  const auto id = rig.identity("late");
  EXPECT_EQ(error_of([&] { rig.sed().recertify(id.device_id, RecertTrigger::Startup); }), ErrorCode::UnknownDevice);
  EXPECT_EQ(error_of([&] { rig.sed().recertify(id.device_id, RecertTrigger::NewDevice); }), ErrorCode::UnknownDevice);
  rig.sed().recertify(id.device_id, RecertTrigger::NewDevice, id);
  EXPECT_EQ(rig.records.back().kind, RecordKind::Provisioned);
  rig.add("late", Role::Bms, false);
  EXPECT_TRUE(rig.auth("late"));
}

TEST(Robustness, NodesNeverThrowOnGarbage) {
  Rig rig(33);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  SeededEntropy rng(33, "garbage");
  std::vector<Bytes> seeds = rig.sent_up;
  seeds.insert(seeds.end(), rig.sent_down.begin(), rig.sent_down.end());
  for (int i = 0; i < 3000; ++i) {
    Bytes f = seeds[static_cast<std::size_t>(i) % seeds.size()];
    const auto pos = read_u16(rng.draw<2>().view(), 0) % f.size();
    f[pos] ^= static_cast<std::uint8_t>(rng.draw<1>().bytes[0] | 1);
    EXPECT_NO_THROW(rig.sed().on_frame(f));
    EXPECT_NO_THROW(bms.on_frame(f));
  }
  for (int i = 0; i < 1000; ++i) {
    Bytes f(rng.draw<1>().bytes[0]);
    rng.fill(f);
    EXPECT_NO_THROW(rig.sed().on_frame(f));
    EXPECT_NO_THROW(bms.on_frame(f));
  }
}

TEST(Robustness, UnexpectedFramesDroppedByDevice) {
  Rig rig(34);
  auto& bms = rig.add("bms");
  ASSERT_TRUE(rig.auth("bms"));
  const Bytes config = of_type(rig.sent_down, MsgType::AuthConfig).back();
  EXPECT_FALSE(bms.on_frame(config).has_value());
  EXPECT_EQ(bms.events().back().kind, EventKind::Dropped);
  EXPECT_EQ(bms.state(), DeviceState::Configured);
}

TEST(Robustness, SedRejectsDeviceOnlyMessages) {
  Rig rig(35);
  rig.add("bms");
  EXPECT_TRUE(rig.sed().on_frame(proto::frame(proto::ProtocolMessage(MsgType::AuthChallenge, {}))).empty());
  EXPECT_EQ(rig.last_sed_error(), ErrorCode::UnexpectedMessage);
}

TEST(SedConstruction, ChecksCaKey) {
  SeededEntropy rng(1);
  SedConfig cfg;
  cfg.algorithm_id = ec::kP256Sha256;
  EXPECT_EQ(error_of([&] { SedNode(cfg, ec::Scalar(ec::toy_curve(), 3), SedLedger{}, rng, system_clock()); }),
            ErrorCode::CurveMismatch);
  EXPECT_EQ(error_of([&] { SedNode(cfg, ec::Scalar(ec::p256(), 0), SedLedger{}, rng, system_clock()); }),
            ErrorCode::InvalidScalar);
}

TEST(Names, RolesAndStates) {
  for (Role r : {Role::Sed, Role::Bms, Role::ControlUnit}) EXPECT_EQ(role_from_string(to_string(r)), r);
  EXPECT_FALSE(role_from_string("toaster").has_value());
  for (int t = 0; t <= 4; ++t) {
    const auto trig = static_cast<RecertTrigger>(t);
    EXPECT_EQ(recert_trigger_from_string(to_string(trig)), trig);
  }
}

}  // namespace
}  // namespace bmsauth::roles
