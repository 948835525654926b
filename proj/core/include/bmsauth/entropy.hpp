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
#include <span>
#include <string_view>

#include "bmsauth/bytes.hpp"

namespace bmsauth {

/// Source of uniform random bytes. One instance is used from one thread at a time.
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  /// Fills `out` with uniform bytes; throws Error(EntropyFailure) when the source is exhausted.
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N>
  FixedBytes<N> draw() {
    FixedBytes<N> v;
    fill(v.bytes);
    return v;
  }
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic stream: SHA-256(seed || label || counter) blocks.
/// For simulation, tests and reproducible CLI runs only.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(std::uint64_t seed, std::string_view label = {});
  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  Bytes prefix_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

/// Always fails. Exercises entropy-failure paths.
class FailingEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

}  // namespace bmsauth
