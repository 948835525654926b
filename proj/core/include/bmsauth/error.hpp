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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bmsauth {

/// Protocol error taxonomy shared by every module. Roles report these as
/// rejection events; library calls throw them wrapped in Error.
enum class ErrorCode {
  // codec
  LengthMismatch,
  UnknownVersion,
  UnknownAlgorithm,
  OffCurvePoint,
  InvalidPointEncoding,
  InvalidScalar,
  InvalidValidity,
  TrailingGarbage,
  // framing
  BadMagic,
  UnknownMessageType,
  UnknownField,
  DuplicateField,
  MissingField,
  Oversize,
  // crypto / protocol
  AuthenticationFailure,
  MalformedMessage,
  NonceMismatch,
  Replay,
  UnknownDevice,
  UnexpectedMessage,
  CertificationFailed,
  DegenerateHash,
  Expired,
  UnauthenticatedPeer,
  EntropyFailure,
  CurveMismatch,
  InvalidParameter,
  // environment
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(what), code_(code), offset_(offset) {}

  ErrorCode code() const { return code_; }
  /// Byte offset into the parsed input, when the error came from a decoder.
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> offset_;
};

}  // namespace bmsauth
