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

#include "bmsauth/roles.hpp"

#include <chrono>

#include "bmsauth/device.hpp"
#include "bmsauth/ledger.hpp"

namespace bmsauth::roles {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Sed:
      return "sed";
    case Role::Bms:
      return "bms";
    case Role::ControlUnit:
      return "cu";
  }
  return "unknown";
}

std::optional<Role> role_from_string(std::string_view s) {
  if (s == "sed") return Role::Sed;
  if (s == "bms") return Role::Bms;
  if (s == "cu" || s == "control-unit") return Role::ControlUnit;
  return std::nullopt;
}

std::string_view to_string(DeviceStatus s) {
  switch (s) {
    case DeviceStatus::Unauthenticated:
      return "Unauthenticated";
    case DeviceStatus::Authenticated:
      return "Authenticated";
    case DeviceStatus::Certified:
      return "Certified";
    case DeviceStatus::Revoked:
      return "Revoked";
  }
  return "Unknown";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Rejected:
      return "rejected";
    case EventKind::Dropped:
      return "dropped";
    case EventKind::Authenticated:
      return "authenticated";
    case EventKind::Configured:
      return "configured";
    case EventKind::Certified:
      return "certified";
    case EventKind::SessionEstablished:
      return "session-established";
    case EventKind::Aborted:
      return "aborted";
  }
  return "unknown";
}

std::string_view to_string(RecertTrigger t) {
  switch (t) {
    case RecertTrigger::NewDevice:
      return "new-device";
    case RecertTrigger::FirmwareUpdate:
      return "firmware-update";
    case RecertTrigger::ConfigChange:
      return "config-change";
    case RecertTrigger::Expiry:
      return "expiry";
    case RecertTrigger::Startup:
      return "startup";
  }
  return "unknown";
}

std::optional<RecertTrigger> recert_trigger_from_string(std::string_view s) {
  for (auto t : {RecertTrigger::NewDevice, RecertTrigger::FirmwareUpdate, RecertTrigger::ConfigChange,
                 RecertTrigger::Expiry, RecertTrigger::Startup}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(DeviceState s) {
  switch (s) {
    case DeviceState::Idle:
      return "Idle";
    case DeviceState::AwaitChallenge:
      return "AwaitChallenge";
    case DeviceState::AwaitConfig:
      return "AwaitConfig";
    case DeviceState::Configured:
      return "Configured";
    case DeviceState::AwaitCertResponse:
      return "AwaitCertResponse";
    case DeviceState::Certified:
      return "Certified";
  }
  return "Unknown";
}

Clock system_clock() {
  return [] {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count());
  };
}

}  // namespace bmsauth::roles
