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

#include "bmsauth/cert_codec.hpp"

#include "bmsauth/error.hpp"

namespace bmsauth::cert {

EncodedCertificate encode(const SessionId& session_id, const CertMeta& meta,
                          const ec::Point& reconstruction_point) {
  const ec::CurveParams& curve = ec::curve_by_id(meta.algorithm_id);
  if (&reconstruction_point.curve() != &curve) {
    throw Error(ErrorCode::CurveMismatch, "reconstruction point is not on the certificate's curve");
  }
  if (meta.valid_from >= meta.valid_to) {
    throw Error(ErrorCode::InvalidValidity, "valid_from must precede valid_to");
  }
  Bytes out;
  out.reserve(kFixedPrefixSize + ec::point_wire_size(curve));
  out.push_back(kCertVersion);
  out.push_back(meta.algorithm_id);
  append(out, session_id.view());
  append(out, meta.issuer_id.view());
  append(out, meta.subject_id.view());
  append_u64(out, meta.valid_from);
  append_u64(out, meta.valid_to);
  append(out, ec::encode_point(reconstruction_point));
  return EncodedCertificate::from_bytes(std::move(out));
}

DecodedCertificate decode(ByteView in) {
  if (in.size() < kFixedPrefixSize + 1) {
    throw Error(ErrorCode::LengthMismatch,
                "certificate shorter than " + std::to_string(kFixedPrefixSize + 1) + " bytes", in.size());
  }
  if (in[0] != kCertVersion) throw Error(ErrorCode::UnknownVersion, "unknown certificate version", 0);
  if (!ec::is_registered(in[1])) throw Error(ErrorCode::UnknownAlgorithm, "unknown algorithm id", 1);
  const ec::CurveParams& curve = ec::curve_by_id(in[1]);

  DecodedCertificate out{SessionId::from(in.subspan(2, 16)), CertMeta{}, ec::Point::identity(curve)};
  out.meta.algorithm_id = in[1];
  out.meta.issuer_id = DeviceId::from(in.subspan(18, 8));
  out.meta.subject_id = DeviceId::from(in.subspan(26, 8));
  out.meta.valid_from = read_u64(in, 34);
  out.meta.valid_to = read_u64(in, 42);
  if (out.meta.valid_from >= out.meta.valid_to) {
    throw Error(ErrorCode::InvalidValidity, "valid_from must precede valid_to", 34);
  }

  constexpr std::size_t kPointOffset = kFixedPrefixSize;
  const std::uint8_t tag = in[kPointOffset];
  std::size_t point_len = 0;
  if (tag == 0x00) {
    point_len = 1;
  } else if (tag == 0x04) {
    point_len = ec::point_wire_size(curve);
  } else {
    throw Error(ErrorCode::InvalidPointEncoding, "unsupported point tag", kPointOffset);
  }
  const std::size_t expected = kPointOffset + point_len;
  if (in.size() < expected) {
    throw Error(ErrorCode::LengthMismatch, "truncated reconstruction point", in.size());
  }
  if (in.size() > expected) {
    throw Error(ErrorCode::TrailingGarbage, "bytes after the reconstruction point", expected);
  }
  try {
    out.reconstruction_point = ec::decode_point(curve, in.subspan(kPointOffset, point_len));
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), kPointOffset + e.offset().value_or(0));
  }
  return out;
}

bool is_valid_at(const CertMeta& meta, std::uint64_t now) { return now >= meta.valid_from && now < meta.valid_to; }

}  // namespace bmsauth::cert
