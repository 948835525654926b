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
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "bmsauth/bytes.hpp"
#include "bmsauth/error.hpp"

namespace bmsauth::roles {

enum class Role : std::uint8_t { Sed = 0, Bms = 1, ControlUnit = 2 };

std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

/// Pre-shared key embedded at fabrication.
using FabricationSecret = Key32;

struct DeviceIdentity {
  DeviceId device_id;
  Role role = Role::Bms;
  FabricationSecret fabrication_secret;
};

enum class DeviceStatus : std::uint8_t { Unauthenticated = 0, Authenticated = 1, Certified = 2, Revoked = 3 };

std::string_view to_string(DeviceStatus s);

/// Seconds since the Unix epoch.
using Clock = std::function<std::uint64_t()>;
Clock system_clock();

enum class EventKind {
  Rejected,        // a message failed verification
  Dropped,         // a message was ignored without a reply
  Authenticated,   // device authentication committed
  Configured,      // device accepted AuthConfig and ratcheted
  Certified,       // certificate issued and acknowledged / keys reconstructed
  SessionEstablished,
  Aborted,         // local flow abandoned
};

std::string_view to_string(EventKind k);

struct Event {
  Role role;
  EventKind kind;
  std::optional<ErrorCode> error;
  DeviceId device;
  std::string detail;
};

using EventSink = std::function<void(const Event&)>;

}  // namespace bmsauth::roles
