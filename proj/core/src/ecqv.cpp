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

#include "bmsauth/ecqv.hpp"

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/error.hpp"

namespace bmsauth::ecqv {

ec::Scalar hash_to_scalar(const ec::CurveParams& curve, ByteView cert_bytes) {
  return ec::Scalar::reduce(curve, ec::mpz_from_bytes(crypto::sha256(cert_bytes)));
}

CertRequestSecret gen_cert_request(const ec::CurveParams& curve, EntropySource& rng) {
  return cert_request_from(ec::random_scalar(curve, rng));
}

CertRequestSecret cert_request_from(const ec::Scalar& t) {
  if (t.is_zero()) throw Error(ErrorCode::InvalidScalar, "request secret must be non-zero");
  return {t, ec::scalar_mul(t, t.curve().generator())};
}

IssuedCertificate issue_with_ephemeral(const ec::Scalar& ca_private, const SessionId& session_id,
                                       const ec::Point& p_req, const CertMeta& meta, const ec::Scalar& k) {
  const ec::CurveParams& curve = ec::curve_by_id(meta.algorithm_id);
  if (&p_req.curve() != &curve || &ca_private.curve() != &curve || &k.curve() != &curve) {
    throw Error(ErrorCode::CurveMismatch, "request, CA key and certificate suite disagree");
  }
  if (p_req.is_identity()) throw Error(ErrorCode::InvalidParameter, "certificate request point is the identity");

  const ec::Point u = ec::point_add(p_req, ec::scalar_mul(k, curve.generator()));
  EncodedCertificate cert = cert::encode(session_id, meta, u);
  const ec::Scalar e = hash_to_scalar(curve, cert.view());
  if (e.is_zero()) throw Error(ErrorCode::DegenerateHash, "certificate hash reduces to zero");
  const ec::Scalar s = e * k + ca_private;
  return {PrivateKeyContribution{s}, std::move(cert)};
}

IssuedCertificate ca_issue(const ec::Scalar& ca_private, const SessionId& session_id, const ec::Point& p_req,
                           const CertMeta& meta, EntropySource& rng) {
  const ec::CurveParams& curve = ec::curve_by_id(meta.algorithm_id);
  for (int attempt = 0; attempt < kMaxIssueAttempts; ++attempt) {
    const ec::Scalar k = ec::random_scalar(curve, rng);
    try {
      IssuedCertificate issued = issue_with_ephemeral(ca_private, session_id, p_req, meta, k);
      if (cert::decode(issued.cert).reconstruction_point.is_identity()) continue;
      return issued;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateHash) throw;
    }
  }
  throw Error(ErrorCode::DegenerateHash, "no usable ephemeral after " + std::to_string(kMaxIssueAttempts) + " attempts");
}

std::optional<KeyPair> reconstruct_own_keys(const CertRequestSecret& req_secret, const PrivateKeyContribution& s,
                                            const EncodedCertificate& cert, const ec::Point& ca_public) {
  const cert::DecodedCertificate decoded = cert::decode(cert);
  const ec::CurveParams& curve = decoded.reconstruction_point.curve();
  if (&req_secret.t.curve() != &curve || &s.s.curve() != &curve || &ca_public.curve() != &curve) {
    return std::nullopt;
  }
  const ec::Scalar e = hash_to_scalar(curve, cert.view());
  const ec::Scalar prk = e * req_secret.t + s.s;
  const ec::Point pub = ec::point_add(ec::scalar_mul(e, decoded.reconstruction_point), ca_public);
  if (prk.is_zero() || pub != ec::scalar_mul(prk, curve.generator())) return std::nullopt;
  return KeyPair{prk, pub};
}

ec::Point reconstruct_peer_public(const EncodedCertificate& cert, const ec::Point& ca_public) {
  const cert::DecodedCertificate decoded = cert::decode(cert);
  const ec::CurveParams& curve = decoded.reconstruction_point.curve();
  if (&ca_public.curve() != &curve) throw Error(ErrorCode::CurveMismatch, "CA key is on a different curve");
  const ec::Scalar e = hash_to_scalar(curve, cert.view());
  return ec::point_add(ec::scalar_mul(e, decoded.reconstruction_point), ca_public);
}

}  // namespace bmsauth::ecqv
