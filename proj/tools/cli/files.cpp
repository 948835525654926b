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

#include "cli/files.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "bmsauth/error.hpp"

namespace bmsauth::cli {

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
    }
    if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": duplicate key");
    }
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorCode::ConfigError, "missing '" + key + "'");
  return it->second;
}

template <std::size_t N>
FixedBytes<N> hex_fixed(const std::string& hex, const char* what) {
  try {
    return FixedBytes<N>::from(from_hex(hex));
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigError, std::string(what) + " must be " + std::to_string(2 * N) + " hex digits");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_private_file(const std::filesystem::path& path, const std::string& content, bool force) {
  const int flags = O_WRONLY | O_CREAT | O_CLOEXEC | (force ? O_TRUNC : O_EXCL);
  const int fd = ::open(path.c_str(), flags, 0600);
  if (fd < 0) {
    if (errno == EEXIST) throw Error(ErrorCode::ConfigError, path.string() + " exists; pass --force to overwrite");
    throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": " + std::strerror(errno));
  }
  ::fchmod(fd, 0600);
  std::size_t done = 0;
  while (done < content.size()) {
    const ssize_t n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (::close(fd) != 0) throw Error(ErrorCode::IoError, "close failed for " + path.string());
}

std::string format_secret_file(const roles::DeviceIdentity& id) {
  std::string s = "# bmsauth fabrication secret; keep mode 0600\n";
  s += "device_id=" + to_hex(id.device_id.view()) + "\n";
  s += "role=" + std::string(roles::to_string(id.role)) + "\n";
  s += "secret=" + to_hex(id.fabrication_secret.view()) + "\n";
  return s;
}

roles::DeviceIdentity parse_secret_file(const std::string& text) {
  const auto kv = parse_kv(text);
  roles::DeviceIdentity id;
  id.device_id = hex_fixed<8>(need(kv, "device_id"), "device_id");
  const auto role = roles::role_from_string(need(kv, "role"));
  if (!role) throw Error(ErrorCode::ConfigError, "role must be sed, bms or cu");
  id.role = *role;
  id.fabrication_secret = Key32(hex_fixed<32>(need(kv, "secret"), "secret").view());
  if (id.fabrication_secret.is_zero()) throw Error(ErrorCode::ConfigError, "secret is all zero");
  return id;
}

roles::DeviceIdentity read_secret_file(const std::filesystem::path& path, std::ostream& warn) {
  struct stat st{};
  if (::stat(path.c_str(), &st) != 0) throw Error(ErrorCode::IoError, "cannot stat " + path.string());
  if ((st.st_mode & 077) != 0) {
    warn << "warning: " << path.string() << " is accessible by group or others (mode "
         << std::oct << (st.st_mode & 0777) << std::dec << "); use chmod 600\n";
  }
  try {
    return parse_secret_file(read_text(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

std::filesystem::path state_path_for(const std::filesystem::path& secret_file) {
  auto p = secret_file;
  p += ".state";
  return p;
}

std::optional<crypto::AuthKeySet> read_device_state(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto kv = parse_kv(read_text(path));
  crypto::AuthKeySet k;
  k.key_auth = Key32(hex_fixed<32>(need(kv, "key_auth"), "key_auth").view());
  k.key_enc = Key32(hex_fixed<32>(need(kv, "key_enc"), "key_enc").view());
  k.key_mac = Key32(hex_fixed<32>(need(kv, "key_mac"), "key_mac").view());
  try {
    k.epoch = std::stoull(need(kv, "epoch"));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ConfigError, path.string() + ": bad epoch");
  }
  return k;
}

void write_device_state(const std::filesystem::path& path, const crypto::AuthKeySet& keys) {
  std::string s = "# bmsauth ratcheted device keys; keep mode 0600\n";
  s += "epoch=" + std::to_string(keys.epoch) + "\n";
  s += "key_auth=" + to_hex(keys.key_auth.view()) + "\n";
  s += "key_enc=" + to_hex(keys.key_enc.view()) + "\n";
  s += "key_mac=" + to_hex(keys.key_mac.view()) + "\n";
  // Write-then-rename keeps the previous epoch intact if the process dies mid-write.
  auto tmp = path;
  tmp += ".tmp";
  write_private_file(tmp, s, true);
  std::filesystem::rename(tmp, path);
}

}  // namespace bmsauth::cli
