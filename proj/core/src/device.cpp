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

#include "bmsauth/device.hpp"

#include <exception>

#include "bmsauth/error.hpp"
#include "flow_mac.hpp"

namespace bmsauth::roles {

using proto::FieldId;
using proto::MsgType;
using proto::ProtocolMessage;

DeviceNode::DeviceNode(DeviceIdentity identity, EntropySource& rng, Clock clock)
    : DeviceNode(identity, crypto::provision_keys(identity.fabrication_secret), rng, std::move(clock)) {}

DeviceNode::DeviceNode(DeviceIdentity identity, crypto::AuthKeySet keys, EntropySource& rng, Clock clock)
    : identity_(std::move(identity)), keys_(std::move(keys)), rng_(rng), clock_(std::move(clock)) {
  if (identity_.role == Role::Sed) throw Error(ErrorCode::ConfigError, "a device node cannot take the SED role");
}

void DeviceNode::emit(EventKind kind, std::optional<ErrorCode> err, std::string detail) {
  Event e{identity_.role, kind, err, identity_.device_id, std::move(detail)};
  if (sink_) sink_(e);
  events_.push_back(std::move(e));
}

void DeviceNode::abort_flow(ErrorCode err, std::string detail) {
  emit(EventKind::Rejected, err, std::move(detail));
  switch (state_) {
    case DeviceState::AwaitChallenge:
    case DeviceState::AwaitConfig:
      state_ = config_ ? (credentials_ ? DeviceState::Certified : DeviceState::Configured) : DeviceState::Idle;
      nonces_.reset();
      challenge_.reset();
      break;
    case DeviceState::AwaitCertResponse:
      state_ = DeviceState::Configured;
      cert_request_.reset();
      cert_nonce_.reset();
      break;
    default:
      break;
  }
  emit(EventKind::Aborted, err);
}

Bytes DeviceNode::start_auth() {
  ProtocolMessage msg(MsgType::AuthHello, SessionId{});
  msg.add(FieldId::DeviceId, identity_.device_id.view());
  const auto role = static_cast<std::uint8_t>(identity_.role);
  msg.add(FieldId::Role, ByteView(&role, 1));
  nonces_.reset();
  challenge_.reset();
  state_ = DeviceState::AwaitChallenge;
  return proto::frame(msg);
}

Bytes DeviceNode::start_cert() {
  if (!config_ || (state_ != DeviceState::Configured && state_ != DeviceState::Certified)) {
    throw Error(ErrorCode::UnexpectedMessage, "certificate request needs a configured device, state is " +
                                                  std::string(to_string(state_)));
  }
  const auto& curve = ec::curve_by_id(config_->algorithm_id);
  cert_request_ = ecqv::gen_cert_request(curve, rng_);
  cert_nonce_ = crypto::fresh_nonce(rng_);
  ProtocolMessage msg(MsgType::CertRequest, config_->session_id);
  msg.add(FieldId::Point, ec::encode_point(cert_request_->p_req));
  msg.add(FieldId::Nonce, cert_nonce_->view());
  detail::attach_mac(msg, keys_.key_mac, proto::step::kCertRequest);
  state_ = DeviceState::AwaitCertResponse;
  return proto::frame(msg);
}

std::optional<Bytes> DeviceNode::on_frame(ByteView frame) {
  ProtocolMessage msg;
  try {
    msg = proto::parse(frame);
  } catch (const Error& e) {
    emit(EventKind::Dropped, e.code(), e.what());
    return std::nullopt;
  }
  try {
    switch (msg.msg_type) {
      case MsgType::AuthChallenge:
        return handle_challenge(msg);
      case MsgType::AuthConfig:
        return handle_config(msg);
      case MsgType::CertResponse:
        return handle_cert_response(msg);
      default:
        emit(EventKind::Dropped, ErrorCode::UnexpectedMessage,
             "device does not accept " + std::string(proto::to_string(msg.msg_type)));
        return std::nullopt;
    }
  } catch (const Error& e) {
    abort_flow(e.code(), e.what());
  } catch (const std::exception& e) {
    abort_flow(ErrorCode::MalformedMessage, e.what());
  }
  return std::nullopt;
}

std::optional<Bytes> DeviceNode::handle_challenge(const ProtocolMessage& msg) {
  if (state_ != DeviceState::AwaitChallenge) {
    emit(EventKind::Dropped, ErrorCode::UnexpectedMessage, "challenge without a pending hello");
    return std::nullopt;
  }
  if (msg.require_fixed<8>(FieldId::DeviceId) != identity_.device_id) {
    emit(EventKind::Dropped, ErrorCode::UnexpectedMessage, "challenge addressed to another device");
    return std::nullopt;
  }
  const auto c = msg.require_fixed<16>(FieldId::Challenge);
  const auto n_sed = msg.require_fixed<crypto::kNonceSize>(FieldId::Nonce);
  nonces_ = crypto::NonceTriple::make(n_sed, crypto::fresh_nonce(rng_));
  challenge_ = c;

  Bytes plain;
  append(plain, c.view());
  append(plain, nonces_->n_sed.view());
  append(plain, nonces_->n_bms.view());
  append(plain, nonces_->n_sum.view());
  const auto sealed = crypto::seal(
      keys_,
      detail::seal_header(MsgType::AuthResponse, SessionId{}, proto::step::kAuthResponse, identity_.device_id.view()),
      plain, rng_);
  secure_wipe(plain.data(), plain.size());

  ProtocolMessage reply(MsgType::AuthResponse, SessionId{});
  reply.add(FieldId::DeviceId, identity_.device_id.view());
  reply.add(FieldId::Nonce, nonces_->n_bms.view());
  reply.add(FieldId::Ciphertext, sealed.ciphertext);
  reply.add(FieldId::MacTag, sealed.mac_tag.view());
  state_ = DeviceState::AwaitConfig;
  return proto::frame(reply);
}

std::optional<Bytes> DeviceNode::handle_config(const ProtocolMessage& msg) {
  if (state_ != DeviceState::AwaitConfig || !nonces_) {
    emit(EventKind::Dropped, ErrorCode::UnexpectedMessage, "configuration without a pending response");
    return std::nullopt;
  }
  crypto::AuthResponse sealed;
  const auto ct = msg.require(FieldId::Ciphertext);
  sealed.ciphertext.assign(ct.begin(), ct.end());
  sealed.mac_tag = msg.require_fixed<crypto::kTagSize>(FieldId::MacTag);
  Bytes plain = crypto::open(keys_, detail::seal_header(MsgType::AuthConfig, msg.session_id, proto::step::kAuthConfig),
                             sealed);
  proto::ConfigPayload cfg = proto::ConfigPayload::decode(plain);
  secure_wipe(plain.data(), plain.size());
  if (cfg.session_id != msg.session_id || cfg.session_id.is_zero()) {
    throw Error(ErrorCode::MalformedMessage, "configured session id differs from the frame");
  }

  const crypto::Nonce n_sum = nonces_->n_sum;
  if (ratchet_enabled_) keys_ = crypto::ratchet(keys_, n_sum);
  config_ = std::move(cfg);
  credentials_.reset();
  nonces_.reset();
  challenge_.reset();

  ProtocolMessage reply(MsgType::AuthConfirm, config_->session_id);
  reply.add(FieldId::DeviceId, identity_.device_id.view());
  detail::attach_mac(reply, keys_.key_mac, proto::step::kAuthConfirm, n_sum.view());
  state_ = DeviceState::Configured;
  emit(EventKind::Configured, std::nullopt, "epoch " + std::to_string(keys_.epoch));
  return proto::frame(reply);
}

std::optional<Bytes> DeviceNode::handle_cert_response(const ProtocolMessage& msg) {
  if (state_ != DeviceState::AwaitCertResponse || !cert_request_ || !config_) {
    emit(EventKind::Dropped, ErrorCode::UnexpectedMessage, "certificate response without a pending request");
    return std::nullopt;
  }
  if (msg.session_id != config_->session_id) {
    emit(EventKind::Dropped, ErrorCode::UnexpectedMessage, "certificate response for another session");
    return std::nullopt;
  }
  if (!detail::check_mac(msg, keys_.key_mac, proto::step::kCertResponse)) {
    abort_flow(ErrorCode::AuthenticationFailure, "CertResponse tag invalid");
    return std::nullopt;
  }
  if (msg.require_fixed<crypto::kNonceSize>(FieldId::Nonce) != *cert_nonce_) {
    abort_flow(ErrorCode::NonceMismatch, "CertResponse does not echo the request nonce");
    return std::nullopt;
  }

  const auto& curve = ec::curve_by_id(config_->algorithm_id);
  const ec::Point ca_public = ec::decode_point(curve, config_->sed_public_key);
  const auto raw_cert = msg.require(FieldId::Certificate);
  const auto cert = cert::EncodedCertificate::from_bytes(Bytes(raw_cert.begin(), raw_cert.end()));
  std::optional<ecqv::KeyPair> kp;
  try {
    const cert::DecodedCertificate dec = cert::decode(cert);
    if (dec.session_id != config_->session_id || dec.meta.subject_id != identity_.device_id ||
        dec.meta.issuer_id != config_->sed_id || dec.meta.algorithm_id != config_->algorithm_id) {
      abort_flow(ErrorCode::CertificationFailed, "certificate fields do not match the configuration");
      return std::nullopt;
    }
    const ec::Scalar s = ec::decode_scalar(curve, msg.require(FieldId::Scalar));
    kp = ecqv::reconstruct_own_keys(*cert_request_, {s}, cert, ca_public);
  } catch (const Error& e) {
    abort_flow(ErrorCode::CertificationFailed, e.what());
    return std::nullopt;
  }
  if (!kp) {
    abort_flow(ErrorCode::CertificationFailed, "reconstructed key pair does not verify");
    return std::nullopt;
  }

  credentials_ = Credentials{identity_.device_id, *kp, cert, ca_public, config_->sed_id};
  cert_request_.reset();
  ProtocolMessage ack(MsgType::CertAck, config_->session_id);
  ack.add(FieldId::Nonce, cert_nonce_->view());
  detail::attach_mac(ack, keys_.key_mac, proto::step::kCertAck, crypto::sha256(cert.view()));
  cert_nonce_.reset();
  state_ = DeviceState::Certified;
  emit(EventKind::Certified, std::nullopt);
  return proto::frame(ack);
}

void DeviceNode::restore(proto::ConfigPayload config, std::optional<Credentials> creds) {
  config_ = std::move(config);
  credentials_ = std::move(creds);
  state_ = credentials_ ? DeviceState::Certified : DeviceState::Configured;
}

}  // namespace bmsauth::roles
