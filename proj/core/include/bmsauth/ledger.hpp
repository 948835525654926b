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
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bmsauth/cert_codec.hpp"
#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/ec_group.hpp"
#include "bmsauth/roles.hpp"

namespace bmsauth::roles {

enum class RecertTrigger : std::uint8_t {
  NewDevice = 0,
  FirmwareUpdate = 1,
  ConfigChange = 2,
  Expiry = 3,
  Startup = 4,
};

std::string_view to_string(RecertTrigger t);
std::optional<RecertTrigger> recert_trigger_from_string(std::string_view s);

struct PendingChallenge {
  crypto::Challenge challenge;
  crypto::Nonce n_sed;
};

/// Keys computed after AuthConfig was sent; committed on AuthConfirm.
struct PendingRatchet {
  crypto::AuthKeySet next;
  crypto::Nonce ratchet_nonce;
  SessionId session_id;
};

struct DeviceRecord {
  DeviceId device_id;
  Role role = Role::Bms;
  FabricationSecret fabrication_secret;
  crypto::AuthKeySet keys;
  SessionId session_id;
  DeviceStatus status = DeviceStatus::Unauthenticated;
  std::optional<cert::EncodedCertificate> cert;
  std::vector<cert::EncodedCertificate> superseded;
  std::optional<PendingChallenge> pending_challenge;
  std::optional<PendingRatchet> pending_ratchet;
  std::optional<cert::EncodedCertificate> pending_cert;
};

struct Transition {
  DeviceId device_id;
  DeviceStatus from;
  DeviceStatus to;
};

/// Append-only ledger file records. Each is one state transition.
enum class RecordKind : std::uint8_t {
  CaIdentity = 0x01,     // sed_id, algorithm_id, ca_private
  Provisioned = 0x02,    // device_id, role, fabrication secret
  Authenticated = 0x03,  // device_id, session_id, ratchet nonce (absent when ratcheting is off)
  Certified = 0x04,      // device_id, certificate
  Recertify = 0x05,      // device_id, trigger
  Revoked = 0x06,        // device_id
};

std::string_view to_string(RecordKind k);

enum class RecordField : std::uint8_t {
  DeviceId = 0x01,
  Role = 0x02,
  Secret = 0x03,
  SessionId = 0x04,
  Nonce = 0x05,
  Certificate = 0x06,
  Trigger = 0x07,
  AlgorithmId = 0x08,
  SedId = 0x09,
};

struct LedgerRecord {
  RecordKind kind = RecordKind::Provisioned;
  std::vector<std::pair<RecordField, Bytes>> fields;

  LedgerRecord& add(RecordField f, ByteView v);
  std::optional<ByteView> get(RecordField f) const;
  ByteView require(RecordField f) const;
};

struct CaIdentity {
  DeviceId sed_id;
  ec::AlgorithmId algorithm_id = ec::kP256Sha256;
  Key32 ca_private;  // encoded scalar
};

inline constexpr std::size_t kReplayCacheSize = 1024;

/// SED-side device database. Single writer; callers serialize access.
class SedLedger {
 public:
  /// Adds an Unauthenticated record with epoch-0 keys. Throws Error(ConfigError) on a duplicate id.
  DeviceRecord& add_device(const DeviceIdentity& id);
  DeviceRecord* find(const DeviceId& id);
  const DeviceRecord* find(const DeviceId& id) const;
  DeviceRecord* find_by_session(const SessionId& sid);
  const std::map<DeviceId, DeviceRecord>& records() const { return records_; }

  /// Applies a status change and logs it. Throws Error(InvalidParameter) for a
  /// transition outside Unauthenticated -> Authenticated -> Certified, re-authentication,
  /// recertification regressions and any -> Revoked.
  void set_status(DeviceRecord& rec, DeviceStatus to, bool recertification = false);
  const std::vector<Transition>& transitions() const { return transitions_; }

  /// Commits a completed authentication: assigns the session id and, when a
  /// ratchet nonce is given, advances the keys.
  void commit_authentication(DeviceRecord& rec, const SessionId& sid, const crypto::AuthKeySet& next);

  /// Regresses status for a re-certification trigger and supersedes the current
  /// certificate. NewDevice, FirmwareUpdate and ConfigChange go back to
  /// Unauthenticated; Expiry and Startup to Authenticated (when past it).
  void recertify(DeviceRecord& rec, RecertTrigger trigger);

  bool session_in_use(const SessionId& sid) const;

  bool nonce_seen(const DeviceId& id, const crypto::Nonce& n) const;
  void remember_nonce(const DeviceId& id, const crypto::Nonce& n);

 private:
  std::map<DeviceId, DeviceRecord> records_;
  std::vector<Transition> transitions_;
  std::deque<std::pair<DeviceId, crypto::Nonce>> replay_fifo_;
  std::set<std::pair<DeviceId, crypto::Nonce>> replay_set_;
};

/// Ledger file: "BMSL" | version(1), then records kind(1) | len(4) | TLVs(field(1) | len(2) | value).
inline constexpr std::uint8_t kLedgerVersion = 0x01;

Bytes encode_ledger_header();
Bytes encode_record(const LedgerRecord& r);

struct LedgerFile {
  std::optional<CaIdentity> ca;
  std::vector<LedgerRecord> records;
};

/// Strict parse; errors carry byte offsets.
LedgerFile parse_ledger(ByteView bytes);
LedgerFile read_ledger_file(const std::filesystem::path& path);
void append_ledger_records(const std::filesystem::path& path, const std::vector<LedgerRecord>& records);

/// Rebuilds device records (keys, status, session, certificate) by replaying records in order.
SedLedger replay_ledger(const LedgerFile& file);

LedgerRecord make_ca_record(const CaIdentity& ca);
LedgerRecord make_provisioned_record(const DeviceIdentity& id);

}  // namespace bmsauth::roles
