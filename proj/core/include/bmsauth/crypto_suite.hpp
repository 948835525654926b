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
#include <string_view>

#include "bmsauth/bytes.hpp"
#include "bmsauth/entropy.hpp"

namespace bmsauth::crypto {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kTagSize = 32;
inline constexpr std::size_t kNonceSize = 16;
inline constexpr std::size_t kIvSize = 16;

using Tag = FixedBytes<kTagSize>;
using Nonce = FixedBytes<kNonceSize>;
/// Random authentication challenge C.
using Challenge = FixedBytes<16>;

/// KDF context labels.
inline constexpr std::string_view kLabelAuth = "auth";
inline constexpr std::string_view kLabelEnc = "enc";
inline constexpr std::string_view kLabelMac = "mac";
inline constexpr std::string_view kLabelSession = "sess";

/// Symmetric keys of the device-authentication phase at one ratchet epoch.
struct AuthKeySet {
  Key32 key_auth;
  Key32 key_enc;
  Key32 key_mac;
  std::uint64_t epoch = 0;

  friend bool operator==(const AuthKeySet&, const AuthKeySet&) = default;
};

/// Encrypt-then-MAC output: IV || CBC ciphertext, and the tag over header || IV || ciphertext.
struct AuthResponse {
  Bytes ciphertext;
  Tag mac_tag;
};

/// HMAC-SHA-256.
Tag mac(ByteView key, ByteView data);
inline Tag mac(const Key32& key, ByteView data) { return mac(key.view(), data); }
bool verify_mac(ByteView key, ByteView data, const Tag& tag);

/// HKDF-SHA-256 (extract with `salt`, expand with `context_label` as info).
/// Expansion is prefix-stable: a shorter output is a prefix of a longer one.
/// Throws Error(InvalidParameter) when out_len is 0 or exceeds 255 * 32.
Bytes kdf(ByteView secret, std::string_view context_label, ByteView salt, std::size_t out_len);
Key32 kdf32(ByteView secret, std::string_view context_label, ByteView salt);

Bytes sha256(ByteView data);

AuthResponse seal(const AuthKeySet& keys, ByteView header, ByteView plaintext, EntropySource& rng);

/// Verifies the tag before touching the cipher.
/// Throws Error(AuthenticationFailure) on a bad tag; Error(MalformedMessage) for a
/// ciphertext length or padding that is invalid under a valid tag.
Bytes open(const AuthKeySet& keys, ByteView header, const AuthResponse& resp);

/// Number of CBC decryptions performed by open() in this process.
std::uint64_t decrypt_invocations() noexcept;

/// Epoch-0 keys derived from the fabrication secret.
AuthKeySet provision_keys(const Key32& fabrication_secret);

/// One forward step: every subkey becomes kdf(key_auth, label, request_nonce, 32).
/// No inverse exists in this API.
AuthKeySet ratchet(const AuthKeySet& keys, const Nonce& request_nonce);

Nonce fresh_nonce(EntropySource& rng);
Challenge fresh_challenge(EntropySource& rng);

/// Big-endian addition modulo 2^(8*width) of equal-width byte strings.
Bytes nonce_sum(ByteView a, ByteView b);
Nonce nonce_sum(const Nonce& a, const Nonce& b);
bool validate_nonce_sum(ByteView n_sed, ByteView n_bms, ByteView n_sum);

/// N_SED, N_BMS and their sum N_SUM.
struct NonceTriple {
  Nonce n_sed;
  Nonce n_bms;
  Nonce n_sum;

  static NonceTriple make(const Nonce& n_sed, const Nonce& n_bms) {
    return {n_sed, n_bms, nonce_sum(n_sed, n_bms)};
  }
  bool valid() const { return validate_nonce_sum(n_sed.view(), n_bms.view(), n_sum.view()); }
};

}  // namespace bmsauth::crypto
