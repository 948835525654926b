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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bmsauth/device.hpp"
#include "bmsauth/entropy.hpp"
#include "bmsauth/protocol.hpp"
#include "bmsauth/sed.hpp"
#include "bmsauth/session.hpp"

namespace bmsauth::harness {

/// Up: device -> SED, or session initiator -> responder. Down: the reverse.
enum class Direction : std::uint8_t { Up, Down };

std::string_view to_string(Direction d);

enum class ActionKind { Drop, Replay, TamperByte, Inject, Delay, Splice };

struct Action {
  ActionKind kind = ActionKind::Drop;
  /// Replay: transcript index of the frame to substitute; nullopt means the
  /// previous frame of the same type and direction.
  std::optional<std::size_t> replay_index;
  /// TamperByte: offset into the frame; nullopt picks one from the seeded stream.
  std::optional<std::size_t> tamper_offset;
  std::uint8_t xor_mask = 0xFF;
  /// Inject: raw bytes delivered right after the matched frame.
  Bytes inject;
  std::uint64_t delay_ticks = 0;
  /// Splice: replacement session id, or the current session id of a named node.
  std::optional<SessionId> splice_session;
  std::string splice_node;
};

struct Rule {
  /// 1-based count of frames with this (direction, type); nullopt matches every one.
  std::optional<std::size_t> occurrence;
  Direction direction = Direction::Up;
  proto::MsgType msg_type = proto::MsgType::AuthHello;
  Action action;
};

/// One rule per line: `<occurrence|*> <up|down> <MsgType> <action> [args]`.
/// Actions: drop | replay [index|last] | tamper <offset|random> [xor-hex]
///          | inject <hex> | delay <ticks> | splice <32-hex|node-name>.
/// '#' starts a comment.
struct AdversaryScript {
  std::vector<Rule> rules;

  /// Throws Error(ConfigError) with the offending line number.
  static AdversaryScript parse(std::string_view text);
};

struct RecordedFrame {
  std::size_t index = 0;
  std::uint64_t tick = 0;
  std::string from;
  std::string to;
  Direction direction = Direction::Up;
  std::optional<proto::MsgType> msg_type;
  Bytes bytes;
  /// Adversary action applied to this frame, empty when untouched.
  std::string adversary;
  bool delivered = true;

  friend bool operator==(const RecordedFrame&, const RecordedFrame&) = default;
};

struct Outcome {
  enum class Kind { Completed, RejectedBy, Incomplete, ScriptError };
  Kind kind = Kind::Completed;
  roles::Role role = roles::Role::Sed;
  std::optional<ErrorCode> error;

  static Outcome completed() { return {}; }
  static Outcome rejected_by(roles::Role r, ErrorCode e) { return {Kind::RejectedBy, r, e}; }

  std::string to_string() const;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct ScenarioReport {
  std::string name;
  std::string threat;  // T1..T7 when part of the suite
  Outcome expected;
  Outcome observed;
  std::vector<RecordedFrame> transcript;
  bool leak_check_passed = true;
  std::vector<std::string> leaks;
  std::string detail;

  bool passed() const { return observed == expected && leak_check_passed; }
};

/// Deterministic, single-threaded network of one SED and any number of devices.
/// Every frame crosses the adversary once per hop and is recorded.
class Simulation {
 public:
  static constexpr std::uint64_t kDefaultStartTime = 1'700'000'000;

  explicit Simulation(std::uint64_t seed, roles::SedConfig sed_config = default_sed_config(),
                      std::uint64_t start_time = kDefaultStartTime);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  static roles::SedConfig default_sed_config();

  void set_script(AdversaryScript script) { script_ = std::move(script); }
  /// Affects the SED and every device added afterwards.
  void set_ratchet_enabled(bool on);

  /// Adds a device node. Unless `provisioned`, the SED ledger never learns it.
  roles::DeviceNode& add_device(const std::string& name, const roles::DeviceIdentity& identity,
                                bool provisioned = true);
  /// Adds a node that claims `identity.device_id` but holds `keys` (counterfeit or cloned).
  roles::DeviceNode& add_impostor(const std::string& name, const roles::DeviceIdentity& identity,
                                  const crypto::AuthKeySet& keys);
  roles::DeviceNode& device(const std::string& name);
  roles::SedNode& sed() { return *sed_; }

  /// Full device authentication. True when the device ends Configured with the SED committed.
  bool run_auth(const std::string& name);
  /// Certificate derivation. True when the device holds credentials and the SED marked it Certified.
  bool run_cert(const std::string& name);
  /// Session establishment `initiator` -> `responder`. True when both sides hold the same key.
  bool run_session(const std::string& initiator, const std::string& responder);
  const roles::SessionOutcome& last_session() const { return last_session_; }

  void advance_clock(std::uint64_t seconds) { clock_offset_ += seconds; }
  std::uint64_t now() const { return start_time_ + clock_offset_; }
  roles::Clock clock() const;

  const std::vector<RecordedFrame>& transcript() const { return transcript_; }
  /// Events from every node, in emission order.
  const std::vector<roles::Event>& events() const { return events_; }
  /// First Rejected or Dropped event, as an outcome.
  std::optional<Outcome> first_rejection() const;

  /// Registers a byte string that must never appear in any recorded frame.
  void plant_secret(const std::string& label, ByteView secret);
  /// Plants keys, fabrication secrets, CA and device private keys, session keys and config payloads.
  void plant_known_secrets();
  /// Exact substring search of every planted secret (>= 16 bytes) in every frame.
  std::vector<std::string> leak_check() const;

  /// Set when a rule referenced a frame that was never recorded.
  const std::optional<std::string>& script_error() const { return script_error_; }
  /// Rules with a fixed occurrence that never fired.
  std::vector<std::string> unfired_rules() const;

 private:
  struct Pending {
    std::uint64_t tick;
    std::uint64_t seq;
    std::string from;
    std::string to;
    Direction direction;
    Bytes bytes;
  };
  struct Node {
    std::unique_ptr<SeededEntropy> rng;
    std::unique_ptr<roles::DeviceNode> device;
  };

  void send(const std::string& from, const std::string& to, Direction dir, Bytes bytes);
  void deliver_all();
  std::vector<Bytes> dispatch(const std::string& to, ByteView bytes);
  void record_event(const roles::Event& e) { events_.push_back(e); }
  void plant_keys(const std::string& label, const crypto::AuthKeySet& keys);
  std::optional<std::size_t> match_rule(Direction dir, proto::MsgType type, std::size_t occurrence);

  std::uint64_t seed_;
  std::uint64_t start_time_;
  std::uint64_t clock_offset_ = 0;
  std::uint64_t tick_ = 0;
  std::uint64_t seq_ = 0;
  bool ratchet_enabled_ = true;

  std::unique_ptr<SeededEntropy> sed_rng_;
  std::unique_ptr<SeededEntropy> adversary_rng_;
  std::unique_ptr<roles::SedNode> sed_;
  std::map<std::string, Node> nodes_;
  std::vector<std::string> node_order_;

  // Active session endpoints during run_session.
  roles::SessionInitiator* initiator_ = nullptr;
  roles::SessionResponder* responder_ = nullptr;
  std::string initiator_name_;
  std::string responder_name_;
  roles::SessionOutcome last_session_;

  AdversaryScript script_;
  std::vector<std::size_t> rule_hits_;
  std::map<std::pair<Direction, proto::MsgType>, std::size_t> occurrences_;
  std::vector<Pending> queue_;
  std::vector<RecordedFrame> transcript_;
  std::vector<roles::Event> events_;
  std::vector<std::pair<std::string, Bytes>> secrets_;
  std::optional<std::string> script_error_;
};

struct DeviceSpec {
  std::string name;
  roles::Role role = roles::Role::Bms;
  /// Ledger entry exists on the SED.
  bool provisioned = true;
};

/// Device set plus the flows to drive. An empty plan authenticates and certifies
/// every device in order.
struct Topology {
  std::vector<DeviceSpec> devices;
  std::vector<std::string> plan;  // "auth <name>", "cert <name>", "session <a> <b>", "advance <seconds>"
};

struct Scenario {
  std::string name;
  Topology topology;
  AdversaryScript script;
  Outcome expected;
};

/// Identity of a named device in scenario topologies: id and secret derived from the seed.
roles::DeviceIdentity scenario_identity(std::uint64_t seed, const std::string& name, roles::Role role);

/// Plants the simulation's secrets, runs the leak check and classifies the outcome:
/// script error, else the first rejection, else Completed when `flows_completed`.
ScenarioReport make_report(Simulation& sim, std::string name, Outcome expected, bool flows_completed);

/// Deterministic given the seed.
ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace bmsauth::harness
