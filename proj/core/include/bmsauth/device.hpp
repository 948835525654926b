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

#include <optional>
#include <vector>

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/ecqv.hpp"
#include "bmsauth/entropy.hpp"
#include "bmsauth/protocol.hpp"
#include "bmsauth/roles.hpp"

namespace bmsauth::roles {

/// Everything a certified device needs to run session establishment.
struct Credentials {
  DeviceId device_id;
  ecqv::KeyPair key_pair;
  cert::EncodedCertificate cert;
  ec::Point ca_public;
  DeviceId sed_id;
};

enum class DeviceState {
  Idle,
  AwaitChallenge,
  AwaitConfig,
  Configured,
  AwaitCertResponse,
  Certified,
};

std::string_view to_string(DeviceState s);

/// BMS or control unit: the certificate-requesting side of device authentication
/// and certificate derivation. Sans-IO.
class DeviceNode {
 public:
  /// Fresh device with epoch-0 keys derived from the fabrication secret.
  DeviceNode(DeviceIdentity identity, EntropySource& rng, Clock clock);
  /// Device restored with previously ratcheted keys.
  DeviceNode(DeviceIdentity identity, crypto::AuthKeySet keys, EntropySource& rng, Clock clock);

  /// AuthHello.
  Bytes start_auth();
  /// CertRequest. Throws Error(UnexpectedMessage) unless Configured or Certified.
  Bytes start_cert();
  /// Handles AuthChallenge, AuthConfig and CertResponse. Returns the reply, if any.
  /// Never throws on adversarial input.
  std::optional<Bytes> on_frame(ByteView frame);

  DeviceState state() const { return state_; }
  const DeviceIdentity& identity() const { return identity_; }
  const crypto::AuthKeySet& keys() const { return keys_; }
  const std::optional<proto::ConfigPayload>& config() const { return config_; }
  const std::optional<Credentials>& credentials() const { return credentials_; }

  /// Restores config (and credentials) after a process restart.
  void restore(proto::ConfigPayload config, std::optional<Credentials> creds);

  void set_ratchet_enabled(bool on) { ratchet_enabled_ = on; }
  /// Replaces the key set. Models key extraction/injection in adversarial tests.
  void set_keys(const crypto::AuthKeySet& keys) { keys_ = keys; }

  const std::vector<Event>& events() const { return events_; }
  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

 private:
  std::optional<Bytes> handle_challenge(const proto::ProtocolMessage& msg);
  std::optional<Bytes> handle_config(const proto::ProtocolMessage& msg);
  std::optional<Bytes> handle_cert_response(const proto::ProtocolMessage& msg);
  void emit(EventKind kind, std::optional<ErrorCode> err, std::string detail = {});
  void abort_flow(ErrorCode err, std::string detail);

  DeviceIdentity identity_;
  crypto::AuthKeySet keys_;
  EntropySource& rng_;
  Clock clock_;
  DeviceState state_ = DeviceState::Idle;
  bool ratchet_enabled_ = true;

  std::optional<crypto::NonceTriple> nonces_;
  std::optional<crypto::Challenge> challenge_;
  std::optional<proto::ConfigPayload> config_;
  std::optional<ecqv::CertRequestSecret> cert_request_;
  std::optional<crypto::Nonce> cert_nonce_;
  std::optional<Credentials> credentials_;
  std::vector<Event> events_;
  EventSink sink_;
};

}  // namespace bmsauth::roles
