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

#include "bmsauth/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "bmsauth/error.hpp"

namespace bmsauth::harness {

using proto::MsgType;
using roles::DeviceState;
using roles::DeviceStatus;

namespace {

constexpr std::size_t kMinSecretSize = 16;
constexpr std::size_t kMaxDeliveries = 10'000;

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::size_t parse_count(const std::string& s, std::size_t line, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

std::string describe(const Rule& r) {
  std::string occ = r.occurrence ? std::to_string(*r.occurrence) : "*";
  return occ + " " + std::string(to_string(r.direction)) + " " + std::string(proto::to_string(r.msg_type));
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

AdversaryScript AdversaryScript::parse(std::string_view text) {
  AdversaryScript script;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) -> Error {
      return Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": " + why);
    };
    if (tok.size() < 4) throw fail("expected <occurrence> <direction> <msg_type> <action>");
    Rule r;
    if (tok[0] != "*") {
      r.occurrence = parse_count(tok[0], line_no, "occurrence");
      if (*r.occurrence == 0) throw fail("occurrences count from 1");
    }
    if (tok[1] == "up") {
      r.direction = Direction::Up;
    } else if (tok[1] == "down") {
      r.direction = Direction::Down;
    } else {
      throw fail("direction must be up or down");
    }
    const auto type = proto::msg_type_from_string(tok[2]);
    if (!type) throw fail("unknown message type '" + tok[2] + "'");
    r.msg_type = *type;
    const std::string& act = tok[3];
    const std::size_t nargs = tok.size() - 4;
    Action& a = r.action;
    if (act == "drop") {
      a.kind = ActionKind::Drop;
      if (nargs != 0) throw fail("drop takes no arguments");
    } else if (act == "replay") {
      a.kind = ActionKind::Replay;
      if (nargs > 1) throw fail("replay takes at most one argument");
      if (nargs == 1 && tok[4] != "last") a.replay_index = parse_count(tok[4], line_no, "transcript index");
    } else if (act == "tamper") {
      a.kind = ActionKind::TamperByte;
      if (nargs < 1 || nargs > 2) throw fail("tamper takes <offset|random> [xor-hex]");
      if (tok[4] != "random") a.tamper_offset = parse_count(tok[4], line_no, "offset");
      if (nargs == 2) {
        Bytes mask;
        try {
          mask = from_hex(tok[5]);
        } catch (const Error&) {
        }
        if (mask.size() != 1 || mask[0] == 0) throw fail("xor mask must be one non-zero hex byte");
        a.xor_mask = mask[0];
      }
    } else if (act == "inject") {
      a.kind = ActionKind::Inject;
      if (nargs != 1) throw fail("inject takes one hex argument");
      try {
        a.inject = from_hex(tok[4]);
      } catch (const Error&) {
        throw fail("inject argument is not hex");
      }
    } else if (act == "delay") {
      a.kind = ActionKind::Delay;
      if (nargs != 1) throw fail("delay takes a tick count");
      a.delay_ticks = parse_count(tok[4], line_no, "tick count");
    } else if (act == "splice") {
      a.kind = ActionKind::Splice;
      if (nargs != 1) throw fail("splice takes a session id or node name");
      if (tok[4].size() == 32 && std::all_of(tok[4].begin(), tok[4].end(), ::isxdigit)) {
        a.splice_session = SessionId::from(from_hex(tok[4]));
      } else {
        a.splice_node = tok[4];
      }
    } else {
      throw fail("unknown action '" + act + "'");
    }
    script.rules.push_back(std::move(r));
  }
  return script;
}

std::string Outcome::to_string() const {
  switch (kind) {
    case Kind::Completed:
      return "completed";
    case Kind::RejectedBy:
      return "rejected-by(" + std::string(roles::to_string(role)) + ", " +
             std::string(error ? bmsauth::to_string(*error) : "?") + ")";
    case Kind::Incomplete:
      return "incomplete";
    case Kind::ScriptError:
      return "script-error";
  }
  return "?";
}

roles::SedConfig Simulation::default_sed_config() {
  roles::SedConfig c;
  c.sed_id = DeviceId::from(from_hex("5ED0000000000001"));
  c.algorithm_id = ec::kP256Sha256;
  return c;
}

Simulation::Simulation(std::uint64_t seed, roles::SedConfig sed_config, std::uint64_t start_time)
    : seed_(seed),
      start_time_(start_time),
      ratchet_enabled_(sed_config.ratchet_enabled),
      sed_rng_(std::make_unique<SeededEntropy>(seed, "sed")),
      adversary_rng_(std::make_unique<SeededEntropy>(seed, "adversary")) {
  const auto& curve = ec::curve_by_id(sed_config.algorithm_id);
  ec::Scalar ca = ec::random_scalar(curve, *sed_rng_);
  sed_ = std::make_unique<roles::SedNode>(sed_config, ca, roles::SedLedger{}, *sed_rng_, clock());
  sed_->set_event_sink([this](const roles::Event& e) { record_event(e); });
  plant_secret("ca private key", ec::encode_scalar(ca));
  plant_secret("sed public key", ec::encode_point(sed_->ca_public()));
}

roles::Clock Simulation::clock() const {
  return [this] { return now(); };
}

void Simulation::set_ratchet_enabled(bool on) {
  ratchet_enabled_ = on;
  sed_->set_ratchet_enabled(on);
}

void Simulation::plant_keys(const std::string& label, const crypto::AuthKeySet& keys) {
  const std::string epoch = " epoch " + std::to_string(keys.epoch);
  plant_secret(label + " key_auth" + epoch, keys.key_auth.view());
  plant_secret(label + " key_enc" + epoch, keys.key_enc.view());
  plant_secret(label + " key_mac" + epoch, keys.key_mac.view());
}

roles::DeviceNode& Simulation::add_device(const std::string& name, const roles::DeviceIdentity& identity,
                                          bool provisioned) {
  if (name == "sed" || nodes_.count(name) != 0) throw Error(ErrorCode::ConfigError, "duplicate node " + name);
  if (provisioned) sed_->ledger().add_device(identity);
  Node node;
  node.rng = std::make_unique<SeededEntropy>(seed_, "node:" + name);
  node.device = std::make_unique<roles::DeviceNode>(identity, *node.rng, clock());
  node.device->set_ratchet_enabled(ratchet_enabled_);
  node.device->set_event_sink([this](const roles::Event& e) { record_event(e); });
  plant_secret(name + " fabrication secret", identity.fabrication_secret.view());
  plant_keys(name, node.device->keys());
  auto& ref = *node.device;
  nodes_.emplace(name, std::move(node));
  node_order_.push_back(name);
  return ref;
}

roles::DeviceNode& Simulation::add_impostor(const std::string& name, const roles::DeviceIdentity& identity,
                                            const crypto::AuthKeySet& keys) {
  if (name == "sed" || nodes_.count(name) != 0) throw Error(ErrorCode::ConfigError, "duplicate node " + name);
  Node node;
  node.rng = std::make_unique<SeededEntropy>(seed_, "node:" + name);
  node.device = std::make_unique<roles::DeviceNode>(identity, keys, *node.rng, clock());
  node.device->set_ratchet_enabled(ratchet_enabled_);
  node.device->set_event_sink([this](const roles::Event& e) { record_event(e); });
  auto& ref = *node.device;
  nodes_.emplace(name, std::move(node));
  node_order_.push_back(name);
  return ref;
}

roles::DeviceNode& Simulation::device(const std::string& name) {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) throw Error(ErrorCode::ConfigError, "no node named " + name);
  return *it->second.device;
}

std::optional<std::size_t> Simulation::match_rule(Direction dir, MsgType type, std::size_t occurrence) {
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const Rule& r = script_.rules[i];
    if (r.direction == dir && r.msg_type == type && (!r.occurrence || *r.occurrence == occurrence)) return i;
  }
  return std::nullopt;
}

void Simulation::send(const std::string& from, const std::string& to, Direction dir, Bytes bytes) {
  if (rule_hits_.size() != script_.rules.size()) rule_hits_.assign(script_.rules.size(), 0);
  RecordedFrame rec;
  rec.tick = tick_;
  rec.from = from;
  rec.to = to;
  rec.direction = dir;
  rec.msg_type = proto::peek_msg_type(bytes);

  std::optional<std::size_t> rule;
  if (rec.msg_type) rule = match_rule(dir, *rec.msg_type, ++occurrences_[{dir, *rec.msg_type}]);

  std::uint64_t deliver_at = tick_ + 1;
  std::optional<Bytes> injected;
  if (rule) {
    ++rule_hits_[*rule];
    const Action& a = script_.rules[*rule].action;
    switch (a.kind) {
      case ActionKind::Drop:
        rec.adversary = "drop";
        rec.delivered = false;
        break;
      case ActionKind::Replay: {
        std::optional<std::size_t> src = a.replay_index;
        if (!src) {
          for (std::size_t i = transcript_.size(); i-- > 0;) {
            if (transcript_[i].msg_type == rec.msg_type && transcript_[i].direction == dir) {
              src = i;
              break;
            }
          }
        }
        if (!src || *src >= transcript_.size()) {
          if (!script_error_) script_error_ = "replay references a frame that was never recorded";
          break;
        }
        bytes = transcript_[*src].bytes;
        rec.msg_type = proto::peek_msg_type(bytes);
        rec.adversary = "replay " + std::to_string(*src);
        break;
      }
      case ActionKind::TamperByte: {
        std::size_t off = 0;
        if (a.tamper_offset) {
          off = *a.tamper_offset;
        } else {
          const auto r = adversary_rng_->draw<8>();
          off = static_cast<std::size_t>(read_u64(r.view(), 0) % bytes.size());
        }
        if (off >= bytes.size()) {
          if (!script_error_) script_error_ = "tamper offset beyond frame end";
          break;
        }
        bytes[off] ^= a.xor_mask;
        rec.adversary = "tamper " + std::to_string(off);
        break;
      }
      case ActionKind::Inject:
        injected = a.inject;
        rec.adversary = "inject-after";
        break;
      case ActionKind::Delay:
        deliver_at += a.delay_ticks;
        rec.adversary = "delay " + std::to_string(a.delay_ticks);
        break;
      case ActionKind::Splice: {
        std::optional<SessionId> sid = a.splice_session;
        if (!sid) {
          auto it = nodes_.find(a.splice_node);
          if (it != nodes_.end() && it->second.device->config()) sid = it->second.device->config()->session_id;
        }
        if (!sid || bytes.size() < proto::kHeaderSize) {
          if (!script_error_) script_error_ = "splice source '" + a.splice_node + "' has no session id";
          break;
        }
        std::copy(sid->bytes.begin(), sid->bytes.end(), bytes.begin() + proto::kSessionIdOffset);
        rec.adversary = "splice";
        break;
      }
    }
  }
  rec.bytes = bytes;
  rec.index = transcript_.size();
  transcript_.push_back(rec);
  if (rec.delivered) queue_.push_back({deliver_at, seq_++, from, to, dir, std::move(bytes)});
  if (injected) {
    RecordedFrame inj;
    inj.index = transcript_.size();
    inj.tick = tick_;
    inj.from = "adversary";
    inj.to = to;
    inj.direction = dir;
    inj.msg_type = proto::peek_msg_type(*injected);
    inj.bytes = *injected;
    inj.adversary = "inject";
    transcript_.push_back(inj);
    queue_.push_back({deliver_at, seq_++, from, to, dir, std::move(*injected)});
  }
}

std::vector<Bytes> Simulation::dispatch(const std::string& to, ByteView bytes) {
  if (to == "sed") return sed_->on_frame(bytes);
  if (initiator_ != nullptr && to == initiator_name_) {
    if (auto r = initiator_->on_frame(bytes)) return {std::move(*r)};
    return {};
  }
  if (responder_ != nullptr && to == responder_name_) {
    if (auto r = responder_->on_frame(bytes)) return {std::move(*r)};
    return {};
  }
  if (auto r = device(to).on_frame(bytes)) return {std::move(*r)};
  return {};
}

void Simulation::deliver_all() {
  std::size_t deliveries = 0;
  while (!queue_.empty() && deliveries++ < kMaxDeliveries) {
    auto it = std::min_element(queue_.begin(), queue_.end(), [](const Pending& a, const Pending& b) {
      return a.tick != b.tick ? a.tick < b.tick : a.seq < b.seq;
    });
    Pending p = std::move(*it);
    queue_.erase(it);
    tick_ = std::max(tick_, p.tick);
    const Direction back = p.direction == Direction::Up ? Direction::Down : Direction::Up;
    for (auto& reply : dispatch(p.to, p.bytes)) send(p.to, p.from, back, std::move(reply));
  }
  queue_.clear();
}

bool Simulation::run_auth(const std::string& name) {
  auto& dev = device(name);
  send(name, "sed", Direction::Up, dev.start_auth());
  deliver_all();
  plant_keys(name, dev.keys());
  if (dev.config()) plant_secret(name + " config payload", dev.config()->encode());
  const auto* rec = sed_->ledger().find(dev.identity().device_id);
  return dev.state() == DeviceState::Configured && rec != nullptr && rec->status == DeviceStatus::Authenticated &&
         dev.config() && rec->session_id == dev.config()->session_id && rec->keys == dev.keys();
}

bool Simulation::run_cert(const std::string& name) {
  auto& dev = device(name);
  Bytes req;
  try {
    req = dev.start_cert();
  } catch (const Error& e) {
    record_event({dev.identity().role, roles::EventKind::Aborted, e.code(), dev.identity().device_id, e.what()});
    return false;
  }
  send(name, "sed", Direction::Up, std::move(req));
  deliver_all();
  if (dev.credentials()) plant_secret(name + " private key", ec::encode_scalar(dev.credentials()->key_pair.prk));
  const auto* rec = sed_->ledger().find(dev.identity().device_id);
  return dev.state() == DeviceState::Certified && dev.credentials() && rec != nullptr &&
         rec->status == DeviceStatus::Certified && rec->cert == dev.credentials()->cert;
}

bool Simulation::run_session(const std::string& initiator, const std::string& responder) {
  auto& a = device(initiator);
  auto& b = device(responder);
  last_session_ = {};
  if (!a.credentials() || !b.credentials()) {
    record_event({a.identity().role, roles::EventKind::Aborted, ErrorCode::UnexpectedMessage,
                  a.identity().device_id, "session needs two certified peers"});
    return false;
  }
  roles::SessionInitiator init(*a.credentials(), *nodes_.at(initiator).rng, clock());
  roles::SessionResponder resp(*b.credentials(), *nodes_.at(responder).rng, clock());
  initiator_ = &init;
  responder_ = &resp;
  initiator_name_ = initiator;
  responder_name_ = responder;
  send(initiator, responder, Direction::Up, init.hello());
  deliver_all();
  initiator_ = nullptr;
  responder_ = nullptr;

  last_session_.initiator_error = init.failure();
  last_session_.responder_error = resp.failure();
  if (init.context().established()) last_session_.initiator_key = init.context().session_key();
  if (resp.context().established()) last_session_.responder_key = resp.context().session_key();
  last_session_.ok = last_session_.initiator_key && last_session_.responder_key &&
                     *last_session_.initiator_key == *last_session_.responder_key;
  // Responder first: it verifies before the initiator can.
  if (auto e = resp.failure()) record_event({b.identity().role, roles::EventKind::Rejected, e, b.identity().device_id, ""});
  if (auto e = init.failure()) record_event({a.identity().role, roles::EventKind::Rejected, e, a.identity().device_id, ""});
  if (last_session_.ok) {
    plant_secret(initiator + "-" + responder + " session key", last_session_.initiator_key->view());
    record_event({a.identity().role, roles::EventKind::SessionEstablished, std::nullopt, a.identity().device_id,
                  fingerprint(last_session_.initiator_key->view())});
    record_event({b.identity().role, roles::EventKind::SessionEstablished, std::nullopt, b.identity().device_id,
                  fingerprint(last_session_.responder_key->view())});
  }
  return last_session_.ok;
}

std::optional<Outcome> Simulation::first_rejection() const {
  for (const auto& e : events_) {
    if ((e.kind == roles::EventKind::Rejected || e.kind == roles::EventKind::Dropped) && e.error) {
      return Outcome::rejected_by(e.role, *e.error);
    }
  }
  return std::nullopt;
}

void Simulation::plant_secret(const std::string& label, ByteView secret) {
  if (secret.size() < kMinSecretSize) return;
  for (const auto& [l, s] : secrets_) {
    if (std::equal(s.begin(), s.end(), secret.begin(), secret.end())) return;
  }
  secrets_.emplace_back(label, Bytes(secret.begin(), secret.end()));
}

void Simulation::plant_known_secrets() {
  for (const auto& [id, rec] : sed_->ledger().records()) {
    const std::string label = "device " + to_hex(id.view());
    plant_secret(label + " fabrication secret", rec.fabrication_secret.view());
    plant_keys(label, rec.keys);
    if (rec.pending_ratchet) plant_keys(label + " pending", rec.pending_ratchet->next);
  }
  for (const auto& name : node_order_) {
    const auto& dev = *nodes_.at(name).device;
    plant_keys(name, dev.keys());
    if (dev.config()) plant_secret(name + " config payload", dev.config()->encode());
    if (dev.credentials()) plant_secret(name + " private key", ec::encode_scalar(dev.credentials()->key_pair.prk));
  }
  if (last_session_.initiator_key) plant_secret("session key", last_session_.initiator_key->view());
  if (last_session_.responder_key) plant_secret("session key", last_session_.responder_key->view());
}

std::vector<std::string> Simulation::leak_check() const {
  std::vector<std::string> leaks;
  for (const auto& [label, secret] : secrets_) {
    for (const auto& f : transcript_) {
      if (std::search(f.bytes.begin(), f.bytes.end(), secret.begin(), secret.end()) != f.bytes.end()) {
        leaks.push_back(label + " in frame " + std::to_string(f.index));
        break;
      }
    }
  }
  return leaks;
}

std::vector<std::string> Simulation::unfired_rules() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const bool hit = i < rule_hits_.size() && rule_hits_[i] > 0;
    if (script_.rules[i].occurrence && !hit) out.push_back(describe(script_.rules[i]));
  }
  return out;
}

roles::DeviceIdentity scenario_identity(std::uint64_t seed, const std::string& name, roles::Role role) {
  SeededEntropy rng(seed, "identity:" + name);
  roles::DeviceIdentity id;
  id.device_id = rng.draw<8>();
  id.role = role;
  id.fabrication_secret = Key32(rng.draw<32>().view());
  return id;
}

ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed) {
  ScenarioReport report;
  report.name = scenario.name;
  report.expected = scenario.expected;
  Simulation sim(seed);
  for (const auto& d : scenario.topology.devices) {
    sim.add_device(d.name, scenario_identity(seed, d.name, d.role), d.provisioned);
  }
  sim.set_script(scenario.script);

  std::vector<std::string> plan = scenario.topology.plan;
  if (plan.empty()) {
    for (const auto& d : scenario.topology.devices) plan.push_back("auth " + d.name);
    for (const auto& d : scenario.topology.devices) plan.push_back("cert " + d.name);
  }
  bool all_ok = true;
  for (const auto& step : plan) {
    const auto tok = split_ws(step);
    bool ok = false;
    try {
      if (tok.size() == 2 && tok[0] == "auth") {
        ok = sim.run_auth(tok[1]);
      } else if (tok.size() == 2 && tok[0] == "cert") {
        ok = sim.run_cert(tok[1]);
      } else if (tok.size() == 3 && tok[0] == "session") {
        ok = sim.run_session(tok[1], tok[2]);
      } else if (tok.size() == 2 && tok[0] == "advance") {
        sim.advance_clock(std::stoull(tok[1]));
        ok = true;
      } else {
        report.detail = "unknown plan step '" + step + "'";
        report.observed.kind = Outcome::Kind::ScriptError;
        return report;
      }
    } catch (const std::exception& e) {
      report.detail = "plan step '" + step + "': " + e.what();
      report.observed.kind = Outcome::Kind::ScriptError;
      return report;
    }
    all_ok = all_ok && ok;
  }

  return make_report(sim, scenario.name, scenario.expected, all_ok);
}

ScenarioReport make_report(Simulation& sim, std::string name, Outcome expected, bool flows_completed) {
  ScenarioReport report;
  report.name = std::move(name);
  report.expected = expected;
  sim.plant_known_secrets();
  report.leaks = sim.leak_check();
  report.leak_check_passed = report.leaks.empty();
  report.transcript = sim.transcript();

  const auto unfired = sim.unfired_rules();
  if (sim.script_error() || !unfired.empty()) {
    report.observed.kind = Outcome::Kind::ScriptError;
    report.detail = sim.script_error() ? *sim.script_error() : "rule never fired: " + unfired.front();
  } else if (auto rej = sim.first_rejection()) {
    report.observed = *rej;
  } else if (flows_completed) {
    report.observed = Outcome::completed();
  } else {
    report.observed.kind = Outcome::Kind::Incomplete;
  }
  return report;
}

}  // namespace bmsauth::harness
