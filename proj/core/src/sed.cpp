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

#include "bmsauth/sed.hpp"

#include <exception>

#include "bmsauth/cert_codec.hpp"
#include "bmsauth/ecqv.hpp"
#include "bmsauth/error.hpp"
#include "flow_mac.hpp"

namespace bmsauth::roles {

using proto::FieldId;
using proto::MsgType;
using proto::ProtocolMessage;

namespace {

// C | N_SED | N_BMS | N_SUM
constexpr std::size_t kAuthPlaintextSize = 16 + 3 * crypto::kNonceSize;

LedgerRecord device_record(RecordKind kind, const DeviceId& id) {
  LedgerRecord r;
  r.kind = kind;
  r.add(RecordField::DeviceId, id.view());
  return r;
}

}  // namespace

SedNode::SedNode(SedConfig config, ec::Scalar ca_private, SedLedger ledger, EntropySource& rng, Clock clock)
    : config_(config),
      ca_private_(std::move(ca_private)),
      ca_public_(ec::scalar_mul(ca_private_, ca_private_.curve().generator())),
      ledger_(std::move(ledger)),
      rng_(rng),
      clock_(std::move(clock)) {
  if (ca_private_.curve().algorithm_id() != config_.algorithm_id) {
    throw Error(ErrorCode::CurveMismatch, "CA key does not belong to the configured algorithm");
  }
  if (ca_private_.is_zero()) throw Error(ErrorCode::InvalidScalar, "CA private key is zero");
}

void SedNode::emit(EventKind kind, const DeviceId& dev, std::optional<ErrorCode> err, std::string detail) {
  Event e{Role::Sed, kind, err, dev, std::move(detail)};
  if (sink_) sink_(e);
  events_.push_back(std::move(e));
}

void SedNode::persist(const LedgerRecord& r) {
  if (record_sink_) record_sink_(r);
}

SessionId SedNode::fresh_session_id() {
  for (;;) {
    SessionId sid = rng_.draw<16>();
    if (!sid.is_zero() && !ledger_.session_in_use(sid)) return sid;
  }
}

std::vector<Bytes> SedNode::on_frame(ByteView frame) {
  ProtocolMessage msg;
  try {
    msg = proto::parse(frame);
  } catch (const Error& e) {
    emit(EventKind::Dropped, DeviceId{}, e.code(), e.what());
    return {};
  }
  try {
    switch (msg.msg_type) {
      case MsgType::AuthHello:
        return handle_auth_hello(msg);
      case MsgType::AuthResponse:
        return handle_auth_response(msg);
      case MsgType::AuthConfirm:
        return handle_auth_confirm(msg);
      case MsgType::CertRequest:
        return handle_cert_request(msg);
      case MsgType::CertAck:
        return handle_cert_ack(msg);
      default:
        emit(EventKind::Dropped, DeviceId{}, ErrorCode::UnexpectedMessage,
             "SED does not accept " + std::string(proto::to_string(msg.msg_type)));
        return {};
    }
  } catch (const Error& e) {
    emit(EventKind::Rejected, DeviceId{}, e.code(), e.what());
  } catch (const std::exception& e) {
    emit(EventKind::Rejected, DeviceId{}, ErrorCode::MalformedMessage, e.what());
  }
  return {};
}

std::vector<Bytes> SedNode::handle_auth_hello(const ProtocolMessage& msg) {
  const auto id = msg.require_fixed<8>(FieldId::DeviceId);
  DeviceRecord* rec = ledger_.find(id);
  if (rec == nullptr) {
    emit(EventKind::Dropped, id, ErrorCode::UnknownDevice, "hello from unprovisioned device");
    return {};
  }
  if (rec->status == DeviceStatus::Revoked) {
    emit(EventKind::Dropped, id, ErrorCode::UnknownDevice, "device revoked");
    return {};
  }
  const auto role = msg.require(FieldId::Role);
  if (role.size() != 1 || role[0] != static_cast<std::uint8_t>(rec->role)) {
    emit(EventKind::Rejected, id, ErrorCode::UnexpectedMessage, "role does not match provisioning");
    return {};
  }
  PendingChallenge pc{crypto::fresh_challenge(rng_), crypto::fresh_nonce(rng_)};
  ProtocolMessage reply(MsgType::AuthChallenge, SessionId{});
  reply.add(FieldId::DeviceId, id.view());
  reply.add(FieldId::Challenge, pc.challenge.view());
  reply.add(FieldId::Nonce, pc.n_sed.view());
  rec->pending_challenge = pc;
  return {proto::frame(reply)};
}

std::vector<Bytes> SedNode::handle_auth_response(const ProtocolMessage& msg) {
  const auto id = msg.require_fixed<8>(FieldId::DeviceId);
  DeviceRecord* rec = ledger_.find(id);
  if (rec == nullptr || rec->status == DeviceStatus::Revoked) {
    emit(EventKind::Dropped, id, ErrorCode::UnknownDevice, "response from unknown device");
    return {};
  }
  const auto n_bms = msg.require_fixed<crypto::kNonceSize>(FieldId::Nonce);
  if (ledger_.nonce_seen(id, n_bms)) {
    emit(EventKind::Rejected, id, ErrorCode::Replay, "N_BMS already used");
    return {};
  }
  if (!rec->pending_challenge) {
    emit(EventKind::Rejected, id, ErrorCode::NonceMismatch, "no outstanding challenge");
    return {};
  }
  const PendingChallenge pc = *rec->pending_challenge;
  rec->pending_challenge.reset();

  crypto::AuthResponse resp;
  const auto ct = msg.require(FieldId::Ciphertext);
  resp.ciphertext.assign(ct.begin(), ct.end());
  resp.mac_tag = msg.require_fixed<crypto::kTagSize>(FieldId::MacTag);
  const Bytes header =
      detail::seal_header(MsgType::AuthResponse, SessionId{}, proto::step::kAuthResponse, id.view());

  Bytes plain;
  try {
    plain = crypto::open(rec->keys, header, resp);
  } catch (const Error& first) {
    // The device may have ratcheted on an AuthConfig whose AuthConfirm never arrived.
    if (first.code() == ErrorCode::AuthenticationFailure && rec->pending_ratchet) {
      try {
        plain = crypto::open(rec->pending_ratchet->next, header, resp);
      } catch (const Error&) {
      }
    }
    if (plain.empty()) {
      emit(EventKind::Rejected, id, first.code(), first.what());
      return {};
    }
    const PendingRatchet pr = *rec->pending_ratchet;
    ledger_.commit_authentication(*rec, pr.session_id, pr.next);
    LedgerRecord r = device_record(RecordKind::Authenticated, id);
    r.add(RecordField::SessionId, pr.session_id.view());
    if (config_.ratchet_enabled) r.add(RecordField::Nonce, pr.ratchet_nonce.view());
    persist(r);
  }
  if (plain.size() != kAuthPlaintextSize) {
    throw Error(ErrorCode::MalformedMessage, "authentication payload has wrong size");
  }
  const ByteView pv(plain);
  const auto c = crypto::Challenge::from(pv.subspan(0, 16));
  const auto n_sed = crypto::Nonce::from(pv.subspan(16, 16));
  const auto inner_bms = crypto::Nonce::from(pv.subspan(32, 16));
  const auto n_sum = crypto::Nonce::from(pv.subspan(48, 16));
  secure_wipe(plain.data(), plain.size());
  if (!constant_time_equal(c.view(), pc.challenge.view()) || !constant_time_equal(n_sed.view(), pc.n_sed.view()) ||
      inner_bms != n_bms || !crypto::validate_nonce_sum(n_sed.view(), n_bms.view(), n_sum.view())) {
    emit(EventKind::Rejected, id, ErrorCode::NonceMismatch, "challenge or nonces do not match");
    return {};
  }
  ledger_.remember_nonce(id, n_bms);

  const SessionId sid = fresh_session_id();
  proto::ConfigPayload cfg;
  cfg.session_id = sid;
  cfg.algorithm_id = config_.algorithm_id;
  cfg.sed_public_key = ec::encode_point(ca_public_);
  cfg.sed_id = config_.sed_id;
  const auto sealed = crypto::seal(rec->keys, detail::seal_header(MsgType::AuthConfig, sid, proto::step::kAuthConfig),
                                   cfg.encode(), rng_);
  ProtocolMessage reply(MsgType::AuthConfig, sid);
  reply.add(FieldId::Ciphertext, sealed.ciphertext);
  reply.add(FieldId::MacTag, sealed.mac_tag.view());

  PendingRatchet pr{config_.ratchet_enabled ? crypto::ratchet(rec->keys, n_sum) : rec->keys, n_sum, sid};
  rec->pending_ratchet = pr;
  return {proto::frame(reply)};
}

std::vector<Bytes> SedNode::handle_auth_confirm(const ProtocolMessage& msg) {
  const auto id = msg.require_fixed<8>(FieldId::DeviceId);
  DeviceRecord* rec = ledger_.find(id);
  if (rec == nullptr || rec->status == DeviceStatus::Revoked) {
    emit(EventKind::Dropped, id, ErrorCode::UnknownDevice, "confirm from unknown device");
    return {};
  }
  if (!rec->pending_ratchet || rec->pending_ratchet->session_id != msg.session_id) {
    emit(EventKind::Dropped, id, ErrorCode::UnexpectedMessage, "no configuration awaiting confirmation");
    return {};
  }
  const PendingRatchet pr = *rec->pending_ratchet;
  if (!detail::check_mac(msg, pr.next.key_mac, proto::step::kAuthConfirm, pr.ratchet_nonce.view())) {
    emit(EventKind::Rejected, id, ErrorCode::AuthenticationFailure, "AuthConfirm tag invalid");
    return {};
  }
  ledger_.commit_authentication(*rec, pr.session_id, pr.next);
  LedgerRecord r = device_record(RecordKind::Authenticated, id);
  r.add(RecordField::SessionId, pr.session_id.view());
  if (config_.ratchet_enabled) r.add(RecordField::Nonce, pr.ratchet_nonce.view());
  persist(r);
  emit(EventKind::Authenticated, id, std::nullopt, "epoch " + std::to_string(rec->keys.epoch));
  return {};
}

std::vector<Bytes> SedNode::handle_cert_request(const ProtocolMessage& msg) {
  DeviceRecord* rec = ledger_.find_by_session(msg.session_id);
  if (rec == nullptr || rec->status == DeviceStatus::Revoked) {
    emit(EventKind::Dropped, DeviceId{}, ErrorCode::UnknownDevice, "no device holds this session id");
    return {};
  }
  const DeviceId id = rec->device_id;
  if (rec->status != DeviceStatus::Authenticated) {
    emit(EventKind::Dropped, id, ErrorCode::UnexpectedMessage,
         "certificate requested in state " + std::string(to_string(rec->status)));
    return {};
  }
  const auto nonce = msg.require_fixed<crypto::kNonceSize>(FieldId::Nonce);
  if (ledger_.nonce_seen(id, nonce)) {
    emit(EventKind::Rejected, id, ErrorCode::Replay, "certificate request nonce already used");
    return {};
  }
  if (!detail::check_mac(msg, rec->keys.key_mac, proto::step::kCertRequest)) {
    emit(EventKind::Rejected, id, ErrorCode::AuthenticationFailure, "CertRequest tag invalid");
    return {};
  }
  ledger_.remember_nonce(id, nonce);
  const auto& curve = ec::curve_by_id(config_.algorithm_id);
  const ec::Point p_req = ec::decode_point(curve, msg.require(FieldId::Point));
  if (p_req.is_identity()) throw Error(ErrorCode::MalformedMessage, "request point is the identity");

  const std::uint64_t now = clock_();
  cert::CertMeta meta{config_.algorithm_id, config_.sed_id, id, now, now + config_.cert_lifetime};
  const auto issued = ecqv::ca_issue(ca_private_, msg.session_id, p_req, meta, rng_);
  rec->pending_cert = issued.cert;

  ProtocolMessage reply(MsgType::CertResponse, msg.session_id);
  reply.add(FieldId::Scalar, ec::encode_scalar(issued.contribution.s));
  reply.add(FieldId::Certificate, issued.cert.view());
  reply.add(FieldId::Nonce, nonce.view());
  detail::attach_mac(reply, rec->keys.key_mac, proto::step::kCertResponse);
  return {proto::frame(reply)};
}

std::vector<Bytes> SedNode::handle_cert_ack(const ProtocolMessage& msg) {
  DeviceRecord* rec = ledger_.find_by_session(msg.session_id);
  if (rec == nullptr || rec->status == DeviceStatus::Revoked) {
    emit(EventKind::Dropped, DeviceId{}, ErrorCode::UnknownDevice, "no device holds this session id");
    return {};
  }
  const DeviceId id = rec->device_id;
  if (!rec->pending_cert) {
    emit(EventKind::Dropped, id, ErrorCode::UnexpectedMessage, "no certificate awaiting acknowledgement");
    return {};
  }
  const Bytes cert_hash = crypto::sha256(rec->pending_cert->view());
  if (!detail::check_mac(msg, rec->keys.key_mac, proto::step::kCertAck, cert_hash)) {
    emit(EventKind::Rejected, id, ErrorCode::AuthenticationFailure, "CertAck tag invalid");
    return {};
  }
  rec->cert = std::move(*rec->pending_cert);
  rec->pending_cert.reset();
  ledger_.set_status(*rec, DeviceStatus::Certified);
  LedgerRecord r = device_record(RecordKind::Certified, id);
  r.add(RecordField::Certificate, rec->cert->view());
  persist(r);
  emit(EventKind::Certified, id, std::nullopt);
  return {};
}

void SedNode::recertify(const DeviceId& device_id, RecertTrigger trigger,
                        const std::optional<DeviceIdentity>& identity) {
  DeviceRecord* rec = ledger_.find(device_id);
  if (rec == nullptr) {
    if (trigger != RecertTrigger::NewDevice || !identity) {
      throw Error(ErrorCode::UnknownDevice, "recertify: unknown device " + to_hex(device_id.view()));
    }
    if (identity->device_id != device_id) throw Error(ErrorCode::InvalidParameter, "identity does not match id");
    ledger_.add_device(*identity);
    persist(make_provisioned_record(*identity));
    return;
  }
  ledger_.recertify(*rec, trigger);
  LedgerRecord r = device_record(RecordKind::Recertify, device_id);
  const auto t = static_cast<std::uint8_t>(trigger);
  r.add(RecordField::Trigger, ByteView(&t, 1));
  persist(r);
}

void SedNode::revoke(const DeviceId& device_id) {
  DeviceRecord* rec = ledger_.find(device_id);
  if (rec == nullptr) throw Error(ErrorCode::UnknownDevice, "revoke: unknown device " + to_hex(device_id.view()));
  ledger_.set_status(*rec, DeviceStatus::Revoked);
  persist(device_record(RecordKind::Revoked, device_id));
}

}  // namespace bmsauth::roles
