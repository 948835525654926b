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

// HKDF-SHA-256 written out over one-shot HMAC, independent of the library's KDF.

#include <cstdint>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <openssl/hmac.h>

namespace hkdf_oracle {

using Bytes = std::vector<std::uint8_t>;

inline Bytes hmac(const Bytes& key, const Bytes& data) {
  Bytes out(32);
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len);
  out.resize(len);
  return out;
}

inline Bytes hkdf(const Bytes& secret, std::string_view info, Bytes salt, std::size_t len) {
  if (salt.empty()) salt.assign(32, 0);
  const Bytes prk = hmac(salt, secret);
  Bytes out, t;
  for (std::uint8_t i = 1; out.size() < len; ++i) {
    Bytes block = t;
    block.insert(block.end(), info.begin(), info.end());
    block.push_back(i);
    t = hmac(prk, block);
    out.insert(out.end(), t.begin(), t.end());
  }
  out.resize(len);
  return out;
}

struct Keys {
  Bytes auth, enc, mac;
};

inline Keys epoch0(const Bytes& fabrication_secret) {
  return {fabrication_secret, hkdf(fabrication_secret, "enc", {}, 32), hkdf(fabrication_secret, "mac", {}, 32)};
}

inline Keys step(const Keys& k, const Bytes& nonce) {
  return {hkdf(k.auth, "auth", nonce, 32), hkdf(k.auth, "enc", nonce, 32), hkdf(k.auth, "mac", nonce, 32)};
}

}  // namespace hkdf_oracle
