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

#include "bmsauth/ledger.hpp"

#include <fstream>
#include <iterator>

#include "bmsauth/error.hpp"

namespace bmsauth::roles {

std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::CaIdentity:
      return "ca-identity";
    case RecordKind::Provisioned:
      return "provisioned";
    case RecordKind::Authenticated:
      return "authenticated";
    case RecordKind::Certified:
      return "certified";
    case RecordKind::Recertify:
      return "recertify";
    case RecordKind::Revoked:
      return "revoked";
  }
  return "unknown";
}

LedgerRecord& LedgerRecord::add(RecordField f, ByteView v) {
  fields.emplace_back(f, Bytes(v.begin(), v.end()));
  return *this;
}

std::optional<ByteView> LedgerRecord::get(RecordField f) const {
  for (const auto& [id, v] : fields) {
    if (id == f) return ByteView(v);
  }
  return std::nullopt;
}

ByteView LedgerRecord::require(RecordField f) const {
  auto v = get(f);
  if (!v) {
    throw Error(ErrorCode::MissingField, "ledger record " + std::string(to_string(kind)) + " lacks field " +
                                             std::to_string(static_cast<int>(f)));
  }
  return *v;
}

DeviceRecord& SedLedger::add_device(const DeviceIdentity& id) {
  if (records_.count(id.device_id) != 0) {
    throw Error(ErrorCode::ConfigError, "device " + to_hex(id.device_id.view()) + " already provisioned");
  }
  if (id.fabrication_secret.is_zero()) throw Error(ErrorCode::ConfigError, "fabrication secret is all zero");
  DeviceRecord rec;
  rec.device_id = id.device_id;
  rec.role = id.role;
  rec.fabrication_secret = id.fabrication_secret;
  rec.keys = crypto::provision_keys(id.fabrication_secret);
  return records_.emplace(id.device_id, std::move(rec)).first->second;
}

DeviceRecord* SedLedger::find(const DeviceId& id) {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

const DeviceRecord* SedLedger::find(const DeviceId& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

DeviceRecord* SedLedger::find_by_session(const SessionId& sid) {
  if (sid.is_zero()) return nullptr;
  for (auto& [id, rec] : records_) {
    if (rec.session_id == sid && rec.status != DeviceStatus::Unauthenticated) return &rec;
  }
  return nullptr;
}

namespace {

bool transition_allowed(DeviceStatus from, DeviceStatus to, bool recertification) {
  using S = DeviceStatus;
  if (from == S::Revoked) return false;
  if (to == S::Revoked) return true;
  if (recertification) return to == S::Unauthenticated || to == S::Authenticated;
  if (to == S::Authenticated) return true;  // first authentication or re-authentication
  return from == S::Authenticated && to == S::Certified;
}

}  // namespace

void SedLedger::set_status(DeviceRecord& rec, DeviceStatus to, bool recertification) {
  if (!transition_allowed(rec.status, to, recertification)) {
    throw Error(ErrorCode::InvalidParameter, "illegal status transition " + std::string(to_string(rec.status)) +
                                                 " -> " + std::string(to_string(to)));
  }
  transitions_.push_back({rec.device_id, rec.status, to});
  rec.status = to;
}

void SedLedger::commit_authentication(DeviceRecord& rec, const SessionId& sid, const crypto::AuthKeySet& next) {
  if (rec.cert) {
    rec.superseded.push_back(*rec.cert);
    rec.cert.reset();
  }
  rec.keys = next;
  rec.session_id = sid;
  rec.pending_ratchet.reset();
  rec.pending_challenge.reset();
  rec.pending_cert.reset();
  set_status(rec, DeviceStatus::Authenticated);
}

void SedLedger::recertify(DeviceRecord& rec, RecertTrigger trigger) {
  if (rec.status == DeviceStatus::Revoked) {
    throw Error(ErrorCode::InvalidParameter, "cannot recertify a revoked device");
  }
  if (rec.cert) {
    rec.superseded.push_back(*rec.cert);
    rec.cert.reset();
  }
  rec.pending_cert.reset();
  rec.pending_challenge.reset();
  switch (trigger) {
    case RecertTrigger::NewDevice:
    case RecertTrigger::FirmwareUpdate:
    case RecertTrigger::ConfigChange:
      set_status(rec, DeviceStatus::Unauthenticated, true);
      break;
    case RecertTrigger::Expiry:
    case RecertTrigger::Startup:
      if (rec.status == DeviceStatus::Certified) set_status(rec, DeviceStatus::Authenticated, true);
      break;
  }
}

bool SedLedger::session_in_use(const SessionId& sid) const {
  for (const auto& [id, rec] : records_) {
    if (rec.session_id == sid) return true;
    if (rec.pending_ratchet && rec.pending_ratchet->session_id == sid) return true;
  }
  return false;
}

bool SedLedger::nonce_seen(const DeviceId& id, const crypto::Nonce& n) const {
  return replay_set_.count({id, n}) != 0;
}

void SedLedger::remember_nonce(const DeviceId& id, const crypto::Nonce& n) {
  if (!replay_set_.insert({id, n}).second) return;
  replay_fifo_.emplace_back(id, n);
  while (replay_fifo_.size() > kReplayCacheSize) {
    replay_set_.erase(replay_fifo_.front());
    replay_fifo_.pop_front();
  }
}

Bytes encode_ledger_header() { return Bytes{'B', 'M', 'S', 'L', kLedgerVersion}; }

Bytes encode_record(const LedgerRecord& r) {
  Bytes body;
  for (const auto& [id, v] : r.fields) {
    body.push_back(static_cast<std::uint8_t>(id));
    append_u16(body, static_cast<std::uint16_t>(v.size()));
    append(body, v);
  }
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(r.kind));
  append_u32(out, static_cast<std::uint32_t>(body.size()));
  append(out, body);
  return out;
}

LedgerFile parse_ledger(ByteView in) {
  if (in.size() < 5 || in[0] != 'B' || in[1] != 'M' || in[2] != 'S' || in[3] != 'L') {
    throw Error(ErrorCode::BadMagic, "not a ledger file", 0);
  }
  if (in[4] != kLedgerVersion) throw Error(ErrorCode::UnknownVersion, "unsupported ledger version", 4);
  LedgerFile file;
  std::size_t pos = 5;
  while (pos < in.size()) {
    const std::size_t start = pos;
    if (in.size() - pos < 5) throw Error(ErrorCode::LengthMismatch, "truncated record header", pos);
    const std::uint8_t kind = in[pos];
    if (kind < 0x01 || kind > 0x06) throw Error(ErrorCode::UnknownMessageType, "unknown record kind", pos);
    const std::uint32_t len = read_u32(in, pos + 1);
    pos += 5;
    if (in.size() - pos < len) throw Error(ErrorCode::LengthMismatch, "record body overruns file", start);
    const std::size_t end = pos + len;
    LedgerRecord rec;
    rec.kind = static_cast<RecordKind>(kind);
    while (pos < end) {
      if (end - pos < 3) throw Error(ErrorCode::LengthMismatch, "truncated record field", pos);
      const std::uint8_t fid = in[pos];
      if (fid < 0x01 || fid > 0x09) throw Error(ErrorCode::UnknownField, "unknown record field", pos);
      const std::uint16_t flen = read_u16(in, pos + 1);
      if (end - pos - 3 < flen) throw Error(ErrorCode::LengthMismatch, "record field overruns record", pos);
      if (rec.get(static_cast<RecordField>(fid))) throw Error(ErrorCode::DuplicateField, "duplicate record field", pos);
      rec.add(static_cast<RecordField>(fid), in.subspan(pos + 3, flen));
      pos += 3 + flen;
    }
    if (rec.kind == RecordKind::CaIdentity) {
      CaIdentity ca;
      try {
        ca.sed_id = DeviceId::from(rec.require(RecordField::SedId));
        auto alg = rec.require(RecordField::AlgorithmId);
        if (alg.size() != 1) throw Error(ErrorCode::LengthMismatch, "algorithm id must be one byte");
        ca.algorithm_id = alg[0];
        ca.ca_private = Key32(rec.require(RecordField::Secret));
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), start);
      }
      file.ca = ca;
    }
    file.records.push_back(std::move(rec));
  }
  return file;
}

LedgerFile read_ledger_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open ledger " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_ledger(data);
}

void append_ledger_records(const std::filesystem::path& path, const std::vector<LedgerRecord>& records) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot write ledger " + path.string());
  Bytes data;
  if (fresh) data = encode_ledger_header();
  for (const auto& r : records) append(data, encode_record(r));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "short write to ledger " + path.string());
}

SedLedger replay_ledger(const LedgerFile& file) {
  SedLedger ledger;
  for (const auto& r : file.records) {
    if (r.kind == RecordKind::CaIdentity) continue;
    const DeviceId id = DeviceId::from(r.require(RecordField::DeviceId));
    if (r.kind == RecordKind::Provisioned) {
      auto role = r.require(RecordField::Role);
      if (role.size() != 1 || role[0] > 2) throw Error(ErrorCode::MalformedMessage, "bad role in ledger");
      ledger.add_device({id, static_cast<Role>(role[0]), Key32(r.require(RecordField::Secret))});
      continue;
    }
    DeviceRecord* rec = ledger.find(id);
    if (rec == nullptr) throw Error(ErrorCode::UnknownDevice, "ledger references unprovisioned device " + to_hex(id.view()));
    switch (r.kind) {
      case RecordKind::Authenticated: {
        crypto::AuthKeySet next = rec->keys;
        if (auto nonce = r.get(RecordField::Nonce)) next = crypto::ratchet(rec->keys, crypto::Nonce::from(*nonce));
        ledger.commit_authentication(*rec, SessionId::from(r.require(RecordField::SessionId)), next);
        break;
      }
      case RecordKind::Certified:
        rec->cert = cert::EncodedCertificate::from_bytes(Bytes(r.require(RecordField::Certificate).begin(),
                                                               r.require(RecordField::Certificate).end()));
        ledger.set_status(*rec, DeviceStatus::Certified);
        break;
      case RecordKind::Recertify: {
        auto t = r.require(RecordField::Trigger);
        if (t.size() != 1 || t[0] > 4) throw Error(ErrorCode::MalformedMessage, "bad trigger in ledger");
        ledger.recertify(*rec, static_cast<RecertTrigger>(t[0]));
        break;
      }
      case RecordKind::Revoked:
        ledger.set_status(*rec, DeviceStatus::Revoked);
        break;
      default:
        break;
    }
  }
  return ledger;
}

LedgerRecord make_ca_record(const CaIdentity& ca) {
  LedgerRecord r;
  r.kind = RecordKind::CaIdentity;
  const std::uint8_t alg = ca.algorithm_id;
  r.add(RecordField::SedId, ca.sed_id.view()).add(RecordField::AlgorithmId, ByteView(&alg, 1));
  r.add(RecordField::Secret, ca.ca_private.view());
  return r;
}

LedgerRecord make_provisioned_record(const DeviceIdentity& id) {
  LedgerRecord r;
  r.kind = RecordKind::Provisioned;
  const auto role = static_cast<std::uint8_t>(id.role);
  r.add(RecordField::DeviceId, id.device_id.view()).add(RecordField::Role, ByteView(&role, 1));
  r.add(RecordField::Secret, id.fabrication_secret.view());
  return r;
}

}  // namespace bmsauth::roles
