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

#include <cstring>

#include "bmsauth/error.hpp"

namespace bmsauth {

template <std::size_t N>
FixedBytes<N> FixedBytes<N>::from(ByteView src) {
  if (src.size() != N) {
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(N) + " bytes, got " + std::to_string(src.size()));
  }
  FixedBytes<N> out;
  std::memcpy(out.bytes.data(), src.data(), N);
  return out;
}

template <std::size_t N>
SecretBytes<N>::SecretBytes(ByteView src) {
  if (src.size() != N) {
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(N) + "-byte secret, got " + std::to_string(src.size()));
  }
  std::memcpy(bytes_.data(), src.data(), N);
}

}  // namespace bmsauth
