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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bmsauth/error.hpp"

namespace bmsauth::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitProtocol = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorCode code);

struct ProvisionOptions {
  std::filesystem::path out_dir;
  /// "<16 hex digits>[:bms|:cu]", role defaults to bms.
  std::vector<std::string> devices;
  std::optional<std::string> sed_id;
  std::string curve = "p256";
  std::optional<std::uint64_t> seed;
  bool force = false;
};

/// Writes <id>.secret per device and sed.ledger (CA identity + one Provisioned record per device).
int cmd_provision(const ProvisionOptions& opts, std::ostream& out, std::ostream& err);

struct RunOptions {
  std::string role;
  std::optional<std::string> listen;
  std::optional<std::string> connect;
  /// Control unit only: BMS address for session establishment.
  std::optional<std::string> peer;
  std::optional<std::string> id;
  std::optional<std::filesystem::path> secret_file;
  std::optional<std::filesystem::path> ledger;
  std::optional<std::string> curve;
  std::optional<std::uint64_t> seed;
  bool no_ratchet = false;
  /// SED: stop after serving this many connections (0 = run until killed).
  std::size_t exit_after = 0;
  std::string message = "hello from the control unit";
  int timeout_ms = 10'000;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Dumps a ledger, certificate (binary or hex lines) or secret file with secrets redacted.
int cmd_inspect(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

int cmd_threats(std::uint64_t seed, bool no_ratchet, const std::optional<std::filesystem::path>& out_dir,
                std::ostream& out, std::ostream& err);

int cmd_bench(std::size_t runs, const std::string& transport, std::uint64_t seed,
              const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);

/// "p256" or "toy"; throws Error(ConfigError).
std::uint8_t curve_from_name(const std::string& name);
std::string curve_name(std::uint8_t algorithm_id);

}  // namespace bmsauth::cli
