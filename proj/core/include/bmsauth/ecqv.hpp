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

#include <optional>

#include "bmsauth/cert_codec.hpp"
#include "bmsauth/ec_group.hpp"
#include "bmsauth/entropy.hpp"

// Implicit certificates (ECQV). Three parties touch a certificate:
//   requester  gen_cert_request -> CertRequestSecret {t, P = t*G}
//   CA         ca_issue: k random, U = P + k*G, Cert = Encode(sid, meta, U),
//              s = e*k + d_CA mod n with e = H(Cert) mod n
//   requester  reconstruct_own_keys: prk = e*t + s, pub = e*U + Q_CA, accept iff pub == prk*G
//   any peer   reconstruct_peer_public: e*U + Q_CA
namespace bmsauth::ecqv {

using cert::CertMeta;
using cert::EncodedCertificate;

struct CertRequestSecret {
  ec::Scalar t;
  ec::Point p_req;
};

struct CaEphemeral {
  ec::Scalar k;
  ec::Point u;
};

/// S, the requester's private-key contribution.
struct PrivateKeyContribution {
  ec::Scalar s;
};

struct KeyPair {
  ec::Scalar prk;
  ec::Point pub;
};

struct IssuedCertificate {
  PrivateKeyContribution contribution;
  EncodedCertificate cert;
};

inline constexpr int kMaxIssueAttempts = 4;

/// H(cert) mod n, with H the suite hash (SHA-256) read as a big-endian integer.
ec::Scalar hash_to_scalar(const ec::CurveParams& curve, ByteView cert_bytes);

CertRequestSecret gen_cert_request(const ec::CurveParams& curve, EntropySource& rng);
/// Deterministic variant with a caller-chosen t.
CertRequestSecret cert_request_from(const ec::Scalar& t);

/// CA side with the ephemeral k supplied by the caller.
/// Throws Error(InvalidParameter) for an identity or wrong-curve p_req and
/// Error(DegenerateHash) when H(cert) reduces to 0.
IssuedCertificate issue_with_ephemeral(const ec::Scalar& ca_private, const SessionId& session_id,
                                       const ec::Point& p_req, const CertMeta& meta,
                                       const ec::Scalar& k);

/// CA side with fresh k; regenerates k when H(cert) == 0 or U is the identity,
/// up to kMaxIssueAttempts, then throws Error(DegenerateHash).
IssuedCertificate ca_issue(const ec::Scalar& ca_private, const SessionId& session_id,
                           const ec::Point& p_req, const CertMeta& meta, EntropySource& rng);

/// Requester side. Returns nullopt when pub != prk*G (tampering or CA mismatch).
/// Throws the codec's Error for an undecodable certificate.
std::optional<KeyPair> reconstruct_own_keys(const CertRequestSecret& req_secret,
                                            const PrivateKeyContribution& s,
                                            const EncodedCertificate& cert,
                                            const ec::Point& ca_public);

ec::Point reconstruct_peer_public(const EncodedCertificate& cert, const ec::Point& ca_public);

}  // namespace bmsauth::ecqv
