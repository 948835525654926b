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

#include "bmsauth/threat_suite.hpp"

#include "bmsauth/error.hpp"

namespace bmsauth::harness {

using roles::Role;

namespace {

Simulation make_sim(std::uint64_t seed, const ThreatSuiteOptions& options) {
  roles::SedConfig c = Simulation::default_sed_config();
  c.ratchet_enabled = options.ratchet_enabled;
  return Simulation(seed, c);
}

ScenarioReport tag(ScenarioReport r, std::string threat, std::string detail) {
  r.threat = std::move(threat);
  if (r.detail.empty()) r.detail = std::move(detail);
  return r;
}

// Malicious configuration injection: a tampered AuthConfig must not configure the device.
ScenarioReport t1(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  auto& dev = sim.add_device("bms", scenario_identity(seed, "bms", Role::Bms));
  // Offset 40 lies inside the sealed ciphertext.
  sim.set_script(AdversaryScript::parse("1 down AuthConfig tamper 40 01"));
  const bool ok = sim.run_auth("bms");
  auto r = make_report(sim, "malicious config injection", Outcome::rejected_by(Role::Bms, ErrorCode::AuthenticationFailure),
                       ok);
  if (dev.keys().epoch != 0 || dev.config()) {
    r.observed.kind = Outcome::Kind::Incomplete;
    r.detail = "device accepted state from a tampered AuthConfig";
  }
  return tag(std::move(r), "T1", "device epoch stays 0");
}

// Eavesdropping: honest flows end to end, then no planted secret may appear on the wire.
ScenarioReport t2(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  sim.add_device("bms", scenario_identity(seed, "bms", Role::Bms));
  sim.add_device("cu", scenario_identity(seed, "cu", Role::ControlUnit));
  bool ok = sim.run_auth("bms") && sim.run_auth("cu") && sim.run_cert("bms") && sim.run_cert("cu");
  ok = ok && sim.run_session("cu", "bms");
  auto r = make_report(sim, "network eavesdrop", Outcome::completed(), ok);
  std::string detail = std::to_string(r.transcript.size()) + " frames scanned";
  return tag(std::move(r), "T2", std::move(detail));
}

// A device the SED never provisioned gets no reply at all.
ScenarioReport t3(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  sim.add_device("rogue", scenario_identity(seed, "rogue", Role::Bms), false);
  const bool ok = sim.run_auth("rogue");
  auto r = make_report(sim, "unconfigured device probe", Outcome::rejected_by(Role::Sed, ErrorCode::UnknownDevice), ok);
  std::size_t replies = 0;
  for (const auto& f : r.transcript) replies += f.from == "sed" ? 1 : 0;
  if (replies != 0) {
    r.observed.kind = Outcome::Kind::Incomplete;
    r.detail = "SED answered an unprovisioned device";
  }
  return tag(std::move(r), "T3", "no frame sent by the SED");
}

// Node capture: an AuthResponse lifted from a completed cycle is replayed into a later one.
ScenarioReport t4(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  sim.add_device("bms", scenario_identity(seed, "bms", Role::Bms));
  sim.set_script(AdversaryScript::parse("2 up AuthResponse replay last"));
  const bool ok = sim.run_auth("bms") && sim.run_auth("bms");
  auto r = make_report(sim, "node capture replay", Outcome::rejected_by(Role::Sed, ErrorCode::Replay), ok);
  return tag(std::move(r), "T4", "second-cycle AuthResponse substituted with the first");
}

// Previous key exposure: the epoch-0 keys and the first transcript leak; after one more
// honest cycle the attacker tries every key it can derive.
ScenarioReport t5(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  const auto identity = scenario_identity(seed, "bms", Role::Bms);
  auto& dev = sim.add_device("bms", identity);
  const crypto::AuthKeySet exposed = dev.keys();
  bool ok = sim.run_auth("bms");
  const std::size_t seen = sim.transcript().size();

  // Ratchet input is recomputed from the observed cleartext nonces.
  std::optional<crypto::Nonce> n_sed, n_bms;
  for (std::size_t i = 0; i < seen; ++i) {
    const auto& f = sim.transcript()[i];
    if (!f.msg_type || !f.delivered) continue;
    const auto msg = proto::parse(f.bytes);
    if (*f.msg_type == proto::MsgType::AuthChallenge) n_sed = msg.require_fixed<16>(proto::FieldId::Nonce);
    if (*f.msg_type == proto::MsgType::AuthResponse) n_bms = msg.require_fixed<16>(proto::FieldId::Nonce);
  }
  std::vector<crypto::AuthKeySet> candidates{exposed};
  if (n_sed && n_bms) candidates.push_back(crypto::ratchet(exposed, crypto::nonce_sum(*n_sed, *n_bms)));

  ok = ok && sim.run_auth("bms");
  bool attacker_completed = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::string name = "attacker" + std::to_string(i);
    sim.add_impostor(name, identity, candidates[i]);
    attacker_completed = attacker_completed || sim.run_auth(name);
  }
  auto r = make_report(sim, "previous key exposure",
                       Outcome::rejected_by(Role::Sed, ErrorCode::AuthenticationFailure), ok);
  if (attacker_completed) {
    r.observed = Outcome::completed();
    r.detail = "attacker completed authentication with exposed keys";
  }
  return tag(std::move(r), "T5", std::to_string(candidates.size()) + " candidate key sets rejected");
}

// Credential splice: a's CertRequest is re-addressed to b's session.
ScenarioReport t6(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  sim.add_device("a", scenario_identity(seed, "a", Role::Bms));
  sim.add_device("b", scenario_identity(seed, "b", Role::Bms));
  bool ok = sim.run_auth("a") && sim.run_auth("b");
  sim.set_script(AdversaryScript::parse("1 up CertRequest splice b"));
  ok = sim.run_cert("a") && ok;
  auto r = make_report(sim, "credential splice", Outcome::rejected_by(Role::Sed, ErrorCode::AuthenticationFailure), ok);
  return tag(std::move(r), "T6", "session id swapped in the frame header");
}

// Counterfeit: the right device id, a guessed fabrication secret.
ScenarioReport t7(std::uint64_t seed, const ThreatSuiteOptions& o) {
  Simulation sim = make_sim(seed, o);
  auto identity = scenario_identity(seed, "bms", Role::Bms);
  sim.add_device("bms", identity);
  SeededEntropy guess(seed, "counterfeit");
  identity.fabrication_secret = Key32(guess.draw<32>().view());
  sim.add_impostor("counterfeit", identity, crypto::provision_keys(identity.fabrication_secret));
  const bool ok = sim.run_auth("counterfeit");
  auto r = make_report(sim, "counterfeit device", Outcome::rejected_by(Role::Sed, ErrorCode::AuthenticationFailure), ok);
  return tag(std::move(r), "T7", "random fabrication secret");
}

}  // namespace

std::vector<ScenarioReport> run_threat_suite(std::uint64_t seed, ThreatSuiteOptions options) {
  return {t1(seed, options), t2(seed, options), t3(seed, options), t4(seed, options),
          t5(seed, options), t6(seed, options), t7(seed, options)};
}

}  // namespace bmsauth::harness
