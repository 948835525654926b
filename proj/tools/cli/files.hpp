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

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/roles.hpp"

namespace bmsauth::cli {

/// Writes `content` with mode 0600. Refuses to replace an existing file unless `force`.
/// Throws Error(ConfigError) on refusal, Error(IoError) otherwise.
void write_private_file(const std::filesystem::path& path, const std::string& content, bool force);

/// Text `key=value` lines; '#' comments.
std::string format_secret_file(const roles::DeviceIdentity& id);
roles::DeviceIdentity parse_secret_file(const std::string& text);

/// Reads a secret file and warns on `warn` when group or others have any access.
roles::DeviceIdentity read_secret_file(const std::filesystem::path& path, std::ostream& warn);

/// Ratcheted keys persisted next to the secret file, so a device survives restarts.
std::filesystem::path state_path_for(const std::filesystem::path& secret_file);
std::optional<crypto::AuthKeySet> read_device_state(const std::filesystem::path& path);
void write_device_state(const std::filesystem::path& path, const crypto::AuthKeySet& keys);

}  // namespace bmsauth::cli
