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

#include "bmsauth/crypto_suite.hpp"
#include "bmsauth/device.hpp"
#include "bmsauth/entropy.hpp"
#include "bmsauth/roles.hpp"

namespace bmsauth::roles {

/// Per-peer session state. The session key is readable only once the peer's
/// key-confirmation response has verified.
class SessionContext {
 public:
  DeviceId peer_id;
  std::optional<ec::Point> peer_public;
  crypto::Challenge chg_out;
  crypto::Challenge chg_in;

  bool established() const { return confirmed_; }
  /// Throws Error(UnauthenticatedPeer) before confirmation.
  const Key32& session_key() const;

 private:
  friend class SessionInitiator;
  friend class SessionResponder;
  std::optional<Key32> k_s_;
  bool confirmed_ = false;
};

/// Static-static ECDH on the certificate keys, salted with both challenges:
/// k_s = kdf(x(own_prk * peer_pub), "sess", min(chg_a, chg_b) || max(chg_a, chg_b), 32).
Key32 derive_session_key(const ecqv::KeyPair& own, const ec::Point& peer_public,
                         const crypto::Challenge& chg_a, const crypto::Challenge& chg_b);

/// Checks algorithm, issuer and validity window, then reconstructs the peer key.
/// Throws Error(Expired), Error(UnauthenticatedPeer) or the codec's errors.
ec::Point validate_peer_certificate(const Credentials& own, const cert::EncodedCertificate& peer_cert,
                                    std::uint64_t now, DeviceId* subject = nullptr);

/// Sends SessHello and SessResponse.
class SessionInitiator {
 public:
  SessionInitiator(const Credentials& creds, EntropySource& rng, Clock clock);

  Bytes hello();
  /// SessChallenge -> SessResponse; SessConfirm -> established. Never throws on bad input.
  std::optional<Bytes> on_frame(ByteView frame);

  const SessionContext& context() const { return ctx_; }
  std::optional<ErrorCode> failure() const { return failure_; }

 private:
  const Credentials& creds_;
  EntropySource& rng_;
  Clock clock_;
  SessionContext ctx_;
  SessionId sid_;
  Bytes transcript_hash_;
  bool sent_hello_ = false;
  bool sent_response_ = false;
  std::optional<ErrorCode> failure_;
};

/// Answers SessHello with SessChallenge and SessResponse with SessConfirm.
class SessionResponder {
 public:
  SessionResponder(const Credentials& creds, EntropySource& rng, Clock clock);

  std::optional<Bytes> on_frame(ByteView frame);

  const SessionContext& context() const { return ctx_; }
  std::optional<ErrorCode> failure() const { return failure_; }

 private:
  const Credentials& creds_;
  EntropySource& rng_;
  Clock clock_;
  SessionContext ctx_;
  SessionId sid_;
  Bytes transcript_hash_;
  bool sent_challenge_ = false;
  std::optional<ErrorCode> failure_;
};

struct SessionOutcome {
  bool ok = false;
  std::optional<ErrorCode> initiator_error;
  std::optional<ErrorCode> responder_error;
  std::optional<Key32> initiator_key;
  std::optional<Key32> responder_key;
};

/// Runs the four-message flow in memory between two certified peers.
SessionOutcome establish_session(const Credentials& a, const Credentials& b, EntropySource& rng_a,
                                 EntropySource& rng_b, Clock clock);

/// Sealed application records under keys expanded from k_s.
class AppChannel {
 public:
  /// `initiator` selects the send direction so records cannot be reflected.
  AppChannel(const Key32& session_key, bool initiator);
  Bytes seal(ByteView plaintext, EntropySource& rng);
  /// Throws Error(AuthenticationFailure) or Error(MalformedMessage).
  Bytes open(ByteView record);

 private:
  crypto::AuthKeySet keys_;
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
  bool initiator_;
};

}  // namespace bmsauth::roles
