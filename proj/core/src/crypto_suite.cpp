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

#include "bmsauth/crypto_suite.hpp"

#include <atomic>
#include <memory>

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>

#include "bmsauth/error.hpp"

namespace bmsauth::crypto {

namespace {

std::atomic<std::uint64_t> g_decrypts{0};

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};

ByteView as_bytes(std::string_view s) { return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}; }

Bytes mac_input(ByteView header, ByteView ciphertext) {
  Bytes in;
  in.reserve(4 + header.size() + ciphertext.size());
  append_u32(in, static_cast<std::uint32_t>(header.size()));
  append(in, header);
  append(in, ciphertext);
  return in;
}

}  // namespace

Tag mac(ByteView key, ByteView data) {
  Tag tag;
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), tag.data(),
           &len) == nullptr ||
      len != kTagSize) {
    throw Error(ErrorCode::InvalidParameter, "HMAC failed");
  }
  return tag;
}

bool verify_mac(ByteView key, ByteView data, const Tag& tag) {
  return constant_time_equal(mac(key, data).view(), tag.view());
}

Bytes sha256(ByteView data) {
  Bytes md(32);
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr);
  return md;
}

Bytes kdf(ByteView secret, std::string_view context_label, ByteView salt, std::size_t out_len) {
  if (out_len == 0 || out_len > 255 * 32) {
    throw Error(ErrorCode::InvalidParameter, "kdf output length out of range");
  }
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  Bytes out(out_len);
  std::size_t len = out_len;
  const auto info = as_bytes(context_label);
  // A zero-length salt is replaced by HashLen zero bytes, per HKDF.
  static const std::uint8_t kZeroSalt[32] = {};
  ByteView effective_salt = salt.empty() ? ByteView(kZeroSalt, sizeof kZeroSalt) : salt;
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), effective_salt.data(), static_cast<int>(effective_salt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), secret.data(), static_cast<int>(secret.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) <= 0 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0 || len != out_len) {
    throw Error(ErrorCode::InvalidParameter, "HKDF derivation failed");
  }
  return out;
}

Key32 kdf32(ByteView secret, std::string_view context_label, ByteView salt) {
  Bytes out = kdf(secret, context_label, salt, 32);
  Key32 key(out);
  secure_wipe(out.data(), out.size());
  return key;
}

AuthResponse seal(const AuthKeySet& keys, ByteView header, ByteView plaintext, EntropySource& rng) {
  std::array<std::uint8_t, kIvSize> iv{};
  rng.fill(iv);

  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  Bytes ct(kIvSize + plaintext.size() + 16);
  std::copy(iv.begin(), iv.end(), ct.begin());
  int len1 = 0;
  int len2 = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, keys.key_enc.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), ct.data() + kIvSize, &len1, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), ct.data() + kIvSize + len1, &len2) != 1) {
    throw Error(ErrorCode::InvalidParameter, "AES-CBC encryption failed");
  }
  ct.resize(kIvSize + static_cast<std::size_t>(len1 + len2));

  AuthResponse out;
  out.mac_tag = mac(keys.key_mac, mac_input(header, ct));
  out.ciphertext = std::move(ct);
  return out;
}

Bytes open(const AuthKeySet& keys, ByteView header, const AuthResponse& resp) {
  if (!verify_mac(keys.key_mac.view(), mac_input(header, resp.ciphertext), resp.mac_tag)) {
    throw Error(ErrorCode::AuthenticationFailure, "MAC verification failed");
  }
  const auto& ct = resp.ciphertext;
  if (ct.size() < kIvSize + 16 || (ct.size() - kIvSize) % 16 != 0) {
    throw Error(ErrorCode::MalformedMessage, "authenticated ciphertext has invalid length");
  }

  g_decrypts.fetch_add(1, std::memory_order_relaxed);
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  Bytes pt(ct.size());
  int len1 = 0;
  int len2 = 0;
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, keys.key_enc.data(), ct.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), pt.data(), &len1, ct.data() + kIvSize,
                        static_cast<int>(ct.size() - kIvSize)) != 1) {
    throw Error(ErrorCode::MalformedMessage, "AES-CBC decryption failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), pt.data() + len1, &len2) != 1) {
    secure_wipe(pt.data(), pt.size());
    throw Error(ErrorCode::MalformedMessage, "bad padding under a valid tag");
  }
  pt.resize(static_cast<std::size_t>(len1 + len2));
  return pt;
}

std::uint64_t decrypt_invocations() noexcept { return g_decrypts.load(std::memory_order_relaxed); }

AuthKeySet provision_keys(const Key32& fabrication_secret) {
  AuthKeySet k;
  k.key_auth = fabrication_secret;
  k.key_enc = kdf32(fabrication_secret.view(), kLabelEnc, {});
  k.key_mac = kdf32(fabrication_secret.view(), kLabelMac, {});
  k.epoch = 0;
  return k;
}

AuthKeySet ratchet(const AuthKeySet& keys, const Nonce& request_nonce) {
  AuthKeySet next;
  next.key_auth = kdf32(keys.key_auth.view(), kLabelAuth, request_nonce.view());
  next.key_enc = kdf32(keys.key_auth.view(), kLabelEnc, request_nonce.view());
  next.key_mac = kdf32(keys.key_auth.view(), kLabelMac, request_nonce.view());
  next.epoch = keys.epoch + 1;
  return next;
}

Nonce fresh_nonce(EntropySource& rng) { return rng.draw<kNonceSize>(); }

Challenge fresh_challenge(EntropySource& rng) { return rng.draw<Challenge::kSize>(); }

Bytes nonce_sum(ByteView a, ByteView b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "nonce widths differ");
  Bytes out(a.size());
  unsigned carry = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    unsigned s = static_cast<unsigned>(a[i]) + b[i] + carry;
    out[i] = static_cast<std::uint8_t>(s);
    carry = s >> 8;
  }
  return out;
}

Nonce nonce_sum(const Nonce& a, const Nonce& b) { return Nonce::from(nonce_sum(a.view(), b.view())); }

bool validate_nonce_sum(ByteView n_sed, ByteView n_bms, ByteView n_sum) {
  if (n_sed.size() != n_bms.size() || n_sum.size() != n_sed.size()) return false;
  return constant_time_equal(nonce_sum(n_sed, n_bms), n_sum);
}

}  // namespace bmsauth::crypto
