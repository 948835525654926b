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

#include "bmsauth/session.hpp"

#include <algorithm>
#include <exception>

#include "bmsauth/error.hpp"
#include "flow_mac.hpp"

namespace bmsauth::roles {

using proto::FieldId;
using proto::MsgType;
using proto::ProtocolMessage;

const Key32& SessionContext::session_key() const {
  if (!confirmed_ || !k_s_) throw Error(ErrorCode::UnauthenticatedPeer, "session not confirmed");
  return *k_s_;
}

Key32 derive_session_key(const ecqv::KeyPair& own, const ec::Point& peer_public, const crypto::Challenge& chg_a,
                         const crypto::Challenge& chg_b) {
  const ec::Point shared = ec::scalar_mul(own.prk, peer_public);
  if (shared.is_identity()) throw Error(ErrorCode::UnauthenticatedPeer, "degenerate shared secret");
  Bytes x = ec::mpz_to_bytes(shared.x(), own.pub.curve().element_bytes());
  Bytes salt;
  const auto& lo = std::min(chg_a, chg_b);
  const auto& hi = std::max(chg_a, chg_b);
  append(salt, lo.view());
  append(salt, hi.view());
  Key32 k = crypto::kdf32(x, crypto::kLabelSession, salt);
  secure_wipe(x.data(), x.size());
  return k;
}

ec::Point validate_peer_certificate(const Credentials& own, const cert::EncodedCertificate& peer_cert,
                                    std::uint64_t now, DeviceId* subject) {
  const cert::DecodedCertificate dec = cert::decode(peer_cert);
  if (dec.meta.algorithm_id != own.ca_public.curve().algorithm_id()) {
    throw Error(ErrorCode::UnauthenticatedPeer, "peer certificate uses another algorithm");
  }
  if (dec.meta.issuer_id != own.sed_id) {
    throw Error(ErrorCode::UnauthenticatedPeer, "peer certificate issued by " + to_hex(dec.meta.issuer_id.view()));
  }
  if (dec.meta.subject_id == own.device_id) {
    throw Error(ErrorCode::UnauthenticatedPeer, "peer presented our own identity");
  }
  if (!cert::is_valid_at(dec.meta, now)) throw Error(ErrorCode::Expired, "peer certificate outside its validity");
  ec::Point pub = ecqv::reconstruct_peer_public(peer_cert, own.ca_public);
  if (pub.is_identity()) throw Error(ErrorCode::UnauthenticatedPeer, "peer key reconstructs to the identity");
  if (subject != nullptr) *subject = dec.meta.subject_id;
  return pub;
}

namespace {

Bytes transcript_hash(const cert::EncodedCertificate& a, const cert::EncodedCertificate& b) {
  Bytes in(a.view().begin(), a.view().end());
  append(in, b.view());
  return crypto::sha256(in);
}

Key32 confirm_key(const Key32& k_s, ByteView th) { return crypto::kdf32(k_s.view(), crypto::kLabelMac, th); }

crypto::Tag confirmation(const Key32& k_s, MsgType type, const SessionId& sid, std::uint8_t step, ByteView th,
                         const crypto::Challenge& chg) {
  Bytes in = proto::transcript_mac_header(type, sid, step);
  append(in, th);
  append(in, chg.view());
  return crypto::mac(confirm_key(k_s, th), in);
}

bool check_confirmation(const Key32& k_s, const ProtocolMessage& msg, std::uint8_t step, ByteView th,
                        const crypto::Challenge& chg) {
  const auto tag = msg.require_fixed<crypto::kTagSize>(FieldId::MacTag);
  const auto expect = confirmation(k_s, msg.msg_type, msg.session_id, step, th, chg);
  return constant_time_equal(tag.view(), expect.view());
}

cert::EncodedCertificate cert_field(const ProtocolMessage& msg) {
  const auto raw = msg.require(FieldId::Certificate);
  return cert::EncodedCertificate::from_bytes(Bytes(raw.begin(), raw.end()));
}

}  // namespace

SessionInitiator::SessionInitiator(const Credentials& creds, EntropySource& rng, Clock clock)
    : creds_(creds), rng_(rng), clock_(std::move(clock)) {
  sid_ = cert::decode(creds_.cert).session_id;
}

Bytes SessionInitiator::hello() {
  ProtocolMessage msg(MsgType::SessHello, sid_);
  msg.add(FieldId::Certificate, creds_.cert.view());
  sent_hello_ = true;
  return proto::frame(msg);
}

std::optional<Bytes> SessionInitiator::on_frame(ByteView frame) {
  if (failure_) return std::nullopt;
  try {
    const ProtocolMessage msg = proto::parse(frame);
    if (msg.session_id != sid_) throw Error(ErrorCode::UnexpectedMessage, "session id mismatch");
    if (msg.msg_type == MsgType::SessChallenge && sent_hello_ && !sent_response_) {
      const auto peer_cert = cert_field(msg);
      ctx_.peer_public = validate_peer_certificate(creds_, peer_cert, clock_(), &ctx_.peer_id);
      ctx_.chg_in = msg.require_fixed<16>(FieldId::Challenge);
      ctx_.chg_out = crypto::fresh_challenge(rng_);
      transcript_hash_ = transcript_hash(creds_.cert, peer_cert);
      ctx_.k_s_ = derive_session_key(creds_.key_pair, *ctx_.peer_public, ctx_.chg_out, ctx_.chg_in);
      const auto tag = confirmation(*ctx_.k_s_, MsgType::SessResponse, sid_, proto::step::kSessResponse,
                                    transcript_hash_, ctx_.chg_in);
      ProtocolMessage reply(MsgType::SessResponse, sid_);
      reply.add(FieldId::MacTag, tag.view());
      reply.add(FieldId::Challenge, ctx_.chg_out.view());
      sent_response_ = true;
      return proto::frame(reply);
    }
    if (msg.msg_type == MsgType::SessConfirm && sent_response_ && !ctx_.confirmed_) {
      if (!check_confirmation(*ctx_.k_s_, msg, proto::step::kSessConfirm, transcript_hash_, ctx_.chg_out)) {
        throw Error(ErrorCode::AuthenticationFailure, "peer key confirmation failed");
      }
      ctx_.confirmed_ = true;
      return std::nullopt;
    }
    throw Error(ErrorCode::UnexpectedMessage, "unexpected " + std::string(proto::to_string(msg.msg_type)));
  } catch (const Error& e) {
    failure_ = e.code();
  } catch (const std::exception&) {
    failure_ = ErrorCode::MalformedMessage;
  }
  ctx_.k_s_.reset();
  return std::nullopt;
}

SessionResponder::SessionResponder(const Credentials& creds, EntropySource& rng, Clock clock)
    : creds_(creds), rng_(rng), clock_(std::move(clock)) {}

std::optional<Bytes> SessionResponder::on_frame(ByteView frame) {
  if (failure_) return std::nullopt;
  try {
    const ProtocolMessage msg = proto::parse(frame);
    if (msg.msg_type == MsgType::SessHello && !sent_challenge_) {
      const auto peer_cert = cert_field(msg);
      ctx_.peer_public = validate_peer_certificate(creds_, peer_cert, clock_(), &ctx_.peer_id);
      if (cert::decode(peer_cert).session_id != msg.session_id) {
        throw Error(ErrorCode::UnauthenticatedPeer, "hello session id differs from the certificate");
      }
      sid_ = msg.session_id;
      ctx_.chg_out = crypto::fresh_challenge(rng_);
      transcript_hash_ = transcript_hash(peer_cert, creds_.cert);
      ProtocolMessage reply(MsgType::SessChallenge, sid_);
      reply.add(FieldId::Certificate, creds_.cert.view());
      reply.add(FieldId::Challenge, ctx_.chg_out.view());
      sent_challenge_ = true;
      return proto::frame(reply);
    }
    if (msg.msg_type == MsgType::SessResponse && sent_challenge_ && !ctx_.confirmed_) {
      if (msg.session_id != sid_) throw Error(ErrorCode::UnexpectedMessage, "session id mismatch");
      ctx_.chg_in = msg.require_fixed<16>(FieldId::Challenge);
      Key32 k = derive_session_key(creds_.key_pair, *ctx_.peer_public, ctx_.chg_out, ctx_.chg_in);
      if (!check_confirmation(k, msg, proto::step::kSessResponse, transcript_hash_, ctx_.chg_out)) {
        throw Error(ErrorCode::AuthenticationFailure, "peer key confirmation failed");
      }
      ctx_.k_s_ = k;
      ctx_.confirmed_ = true;
      const auto tag = confirmation(k, MsgType::SessConfirm, sid_, proto::step::kSessConfirm, transcript_hash_,
                                    ctx_.chg_in);
      ProtocolMessage reply(MsgType::SessConfirm, sid_);
      reply.add(FieldId::MacTag, tag.view());
      return proto::frame(reply);
    }
    throw Error(ErrorCode::UnexpectedMessage, "unexpected " + std::string(proto::to_string(msg.msg_type)));
  } catch (const Error& e) {
    failure_ = e.code();
  } catch (const std::exception&) {
    failure_ = ErrorCode::MalformedMessage;
  }
  ctx_.k_s_.reset();
  ctx_.confirmed_ = false;
  return std::nullopt;
}

SessionOutcome establish_session(const Credentials& a, const Credentials& b, EntropySource& rng_a,
                                 EntropySource& rng_b, Clock clock) {
  SessionInitiator init(a, rng_a, clock);
  SessionResponder resp(b, rng_b, clock);
  SessionOutcome out;
  std::optional<Bytes> to_resp = init.hello();
  while (to_resp) {
    auto to_init = resp.on_frame(*to_resp);
    to_resp.reset();
    if (to_init) to_resp = init.on_frame(*to_init);
  }
  out.initiator_error = init.failure();
  out.responder_error = resp.failure();
  if (init.context().established()) out.initiator_key = init.context().session_key();
  if (resp.context().established()) out.responder_key = resp.context().session_key();
  out.ok = out.initiator_key && out.responder_key && *out.initiator_key == *out.responder_key;
  return out;
}

namespace {

constexpr std::uint8_t kDirInitiator = 0x01;
constexpr std::uint8_t kDirResponder = 0x02;

Bytes app_header(std::uint8_t dir, std::uint64_t seq) {
  Bytes h{'A', 'P', 'P', dir};
  append_u64(h, seq);
  return h;
}

}  // namespace

AppChannel::AppChannel(const Key32& session_key, bool initiator) : initiator_(initiator) {
  keys_.key_enc = crypto::kdf32(session_key.view(), crypto::kLabelEnc, {});
  keys_.key_mac = crypto::kdf32(session_key.view(), crypto::kLabelMac, {});
}

Bytes AppChannel::seal(ByteView plaintext, EntropySource& rng) {
  const auto sealed =
      crypto::seal(keys_, app_header(initiator_ ? kDirInitiator : kDirResponder, send_seq_), plaintext, rng);
  ++send_seq_;
  Bytes out;
  append_u32(out, static_cast<std::uint32_t>(sealed.ciphertext.size()));
  append(out, sealed.ciphertext);
  append(out, sealed.mac_tag.view());
  return out;
}

Bytes AppChannel::open(ByteView record) {
  if (record.size() < 4 + crypto::kTagSize) throw Error(ErrorCode::MalformedMessage, "application record too short");
  const std::uint32_t len = read_u32(record, 0);
  if (record.size() != 4 + std::size_t{len} + crypto::kTagSize) {
    throw Error(ErrorCode::MalformedMessage, "application record length mismatch");
  }
  crypto::AuthResponse sealed;
  sealed.ciphertext.assign(record.begin() + 4, record.begin() + 4 + len);
  sealed.mac_tag = crypto::Tag::from(record.subspan(4 + len));
  Bytes plain = crypto::open(keys_, app_header(initiator_ ? kDirResponder : kDirInitiator, recv_seq_), sealed);
  ++recv_seq_;
  return plain;
}

}  // namespace bmsauth::roles
