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

#include "bmsauth/error.hpp"

#include <array>
#include <utility>

namespace bmsauth {

namespace {
constexpr std::array<std::pair<ErrorCode, std::string_view>, 29> kNames{{
    {ErrorCode::LengthMismatch, "length-mismatch"},
    {ErrorCode::UnknownVersion, "unknown-version"},
    {ErrorCode::UnknownAlgorithm, "unknown-algorithm"},
    {ErrorCode::OffCurvePoint, "off-curve-point"},
    {ErrorCode::InvalidPointEncoding, "invalid-point-encoding"},
    {ErrorCode::InvalidScalar, "invalid-scalar"},
    {ErrorCode::InvalidValidity, "invalid-validity"},
    {ErrorCode::TrailingGarbage, "trailing-garbage"},
    {ErrorCode::BadMagic, "bad-magic"},
    {ErrorCode::UnknownMessageType, "unknown-message-type"},
    {ErrorCode::UnknownField, "unknown-field"},
    {ErrorCode::DuplicateField, "duplicate-field"},
    {ErrorCode::MissingField, "missing-field"},
    {ErrorCode::Oversize, "oversize"},
    {ErrorCode::AuthenticationFailure, "authentication-failure"},
    {ErrorCode::MalformedMessage, "malformed-message"},
    {ErrorCode::NonceMismatch, "nonce-mismatch"},
    {ErrorCode::Replay, "replay"},
    {ErrorCode::UnknownDevice, "unknown-device"},
    {ErrorCode::UnexpectedMessage, "unexpected-message"},
    {ErrorCode::CertificationFailed, "certification-failed"},
    {ErrorCode::DegenerateHash, "degenerate-hash"},
    {ErrorCode::Expired, "expired"},
    {ErrorCode::UnauthenticatedPeer, "unauthenticated-peer"},
    {ErrorCode::EntropyFailure, "entropy-failure"},
    {ErrorCode::CurveMismatch, "curve-mismatch"},
    {ErrorCode::InvalidParameter, "invalid-parameter"},
    {ErrorCode::ConfigError, "config-error"},
    {ErrorCode::IoError, "io-error"},
}};
}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown-error";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

}  // namespace bmsauth
