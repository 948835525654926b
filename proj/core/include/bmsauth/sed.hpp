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

#include <cstdint>
#include <optional>
#include <vector>

#include "bmsauth/ec_group.hpp"
#include "bmsauth/entropy.hpp"
#include "bmsauth/ledger.hpp"
#include "bmsauth/protocol.hpp"
#include "bmsauth/roles.hpp"

namespace bmsauth::roles {

struct SedConfig {
  DeviceId sed_id;
  ec::AlgorithmId algorithm_id = ec::kP256Sha256;
  /// Lifetime of issued certificates, seconds.
  std::uint64_t cert_lifetime = 30ull * 24 * 3600;
  /// Turning this off reproduces the "updates neglect" residual risk. Test use only.
  bool ratchet_enabled = true;
};

/// Secure Edge Device: verifier for device authentication and local CA.
/// Sans-IO: frames in, frames out. Not internally synchronized.
class SedNode {
 public:
  SedNode(SedConfig config, ec::Scalar ca_private, SedLedger ledger, EntropySource& rng, Clock clock);

  /// Handles one inbound frame and returns the frames to send back (possibly none).
  /// Never throws on adversarial input; failures become events.
  std::vector<Bytes> on_frame(ByteView frame);

  const SedConfig& config() const { return config_; }
  void set_ratchet_enabled(bool on) { config_.ratchet_enabled = on; }
  const ec::Point& ca_public() const { return ca_public_; }
  SedLedger& ledger() { return ledger_; }
  const SedLedger& ledger() const { return ledger_; }

  const std::vector<Event>& events() const { return events_; }
  void clear_events() { events_.clear(); }
  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

  /// Receives one record per persisted state transition.
  void set_record_sink(std::function<void(const LedgerRecord&)> sink) { record_sink_ = std::move(sink); }

  /// Forces a new certificate derivation for a device.
  /// NewDevice, FirmwareUpdate and ConfigChange reset to Unauthenticated (full
  /// authentication + certification); Expiry and Startup reset to Authenticated
  /// (certification only). The current certificate is marked superseded.
  /// NewDevice for an unknown id requires `identity`; other triggers throw
  /// Error(UnknownDevice) for unknown ids.
  void recertify(const DeviceId& device_id, RecertTrigger trigger,
                 const std::optional<DeviceIdentity>& identity = std::nullopt);

  void revoke(const DeviceId& device_id);

 private:
  std::vector<Bytes> handle_auth_hello(const proto::ProtocolMessage& msg);
  std::vector<Bytes> handle_auth_response(const proto::ProtocolMessage& msg);
  std::vector<Bytes> handle_auth_confirm(const proto::ProtocolMessage& msg);
  std::vector<Bytes> handle_cert_request(const proto::ProtocolMessage& msg);
  std::vector<Bytes> handle_cert_ack(const proto::ProtocolMessage& msg);

  void emit(EventKind kind, const DeviceId& dev, std::optional<ErrorCode> err, std::string detail = {});
  void persist(const LedgerRecord& r);
  SessionId fresh_session_id();

  SedConfig config_;
  ec::Scalar ca_private_;
  ec::Point ca_public_;
  SedLedger ledger_;
  EntropySource& rng_;
  Clock clock_;
  std::vector<Event> events_;
  EventSink sink_;
  std::function<void(const LedgerRecord&)> record_sink_;
};

}  // namespace bmsauth::roles
