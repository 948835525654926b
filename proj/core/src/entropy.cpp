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

#include "bmsauth/entropy.hpp"

#include <cstring>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "bmsauth/error.hpp"

namespace bmsauth {

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(ErrorCode::EntropyFailure, "RAND_bytes failed");
  }
}

SeededEntropy::SeededEntropy(std::uint64_t seed, std::string_view label) {
  append(prefix_, ByteView(reinterpret_cast<const std::uint8_t*>("bmsauth-drbg"), 12));
  append_u64(prefix_, seed);
  append_u32(prefix_, static_cast<std::uint32_t>(label.size()));
  append(prefix_, ByteView(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
}

void SeededEntropy::refill() {
  Bytes input = prefix_;
  append_u64(input, counter_++);
  unsigned int len = 0;
  if (EVP_Digest(input.data(), input.size(), block_.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::EntropyFailure, "digest failed");
  }
  used_ = 0;
}

void SeededEntropy::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) refill();
    std::size_t n = std::min(out.size() - pos, block_.size() - used_);
    std::memcpy(out.data() + pos, block_.data() + used_, n);
    used_ += n;
    pos += n;
  }
}

void FailingEntropy::fill(std::span<std::uint8_t>) {
  throw Error(ErrorCode::EntropyFailure, "entropy source exhausted");
}

}  // namespace bmsauth
