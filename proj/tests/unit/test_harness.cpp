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

#include <gtest/gtest.h>

#include "bmsauth/bench.hpp"
#include "bmsauth/error.hpp"
#include "bmsauth/simulator.hpp"
#include "bmsauth/threat_suite.hpp"
#include "test_util.hpp"

namespace bmsauth::harness {
namespace {

using proto::MsgType;
using roles::Role;
using test_support::error_of;

Scenario basic(std::string name, std::string script_text = {}, Outcome expected = Outcome::completed()) {
  Scenario s;
  s.name = std::move(name);
  s.topology.devices = {{"bms", Role::Bms, true}, {"cu", Role::ControlUnit, true}};
  s.script = AdversaryScript::parse(script_text);
  s.expected = expected;
  return s;
}

TEST(Script, ParsesEveryAction) {
  const auto s = AdversaryScript::parse(
      "# comment line\n"
      "1 up AuthHello drop\n"
      "* down AuthChallenge replay\n"
      "2 up AuthResponse replay last   # trailing comment\n"
      "3 up AuthResponse replay 4\n"
      "1 down AuthConfig tamper 40 01\n"
      "1 down AuthConfig tamper random\n"
      "1 up CertRequest inject b45a\n"
      "1 up CertAck delay 5\n"
      "1 up CertRequest splice 000102030405060708090a0b0c0d0e0f\n"
      "1 up CertRequest splice bms\n"
      "\n");
  ASSERT_EQ(s.rules.size(), 10u);
  EXPECT_EQ(s.rules[0].occurrence, 1u);
  EXPECT_EQ(s.rules[0].action.kind, ActionKind::Drop);
  EXPECT_FALSE(s.rules[1].occurrence.has_value());
  EXPECT_EQ(s.rules[1].direction, Direction::Down);
  EXPECT_FALSE(s.rules[2].action.replay_index.has_value());
  EXPECT_EQ(s.rules[3].action.replay_index, 4u);
  EXPECT_EQ(s.rules[4].action.tamper_offset, 40u);
  EXPECT_EQ(s.rules[4].action.xor_mask, 0x01);
  EXPECT_FALSE(s.rules[5].action.tamper_offset.has_value());
  EXPECT_EQ(s.rules[6].action.inject, (Bytes{0xb4, 0x5a}));
  EXPECT_EQ(s.rules[7].action.delay_ticks, 5u);
  ASSERT_TRUE(s.rules[8].action.splice_session.has_value());
  EXPECT_EQ(s.rules[8].action.splice_session->bytes[15], 0x0f);
  EXPECT_EQ(s.rules[9].action.splice_node, "bms");
}

TEST(Script, ErrorsNameTheLine) {
  const char* bad[] = {
      "1 up AuthHello",
      "1 sideways AuthHello drop",
      "1 up Hello drop",
      "0 up AuthHello drop",
      "x up AuthHello drop",
      "1 up AuthHello explode",
      "1 up AuthHello drop now",
      "1 up AuthHello tamper",
      "1 up AuthHello tamper 3 00",
      "1 up AuthHello inject zz",
      "1 up AuthHello delay",
  };
  for (const char* line : bad) {
    const std::string text = std::string("# ok\n\n") + line + "\n";
    try {
      AdversaryScript::parse(text);
      ADD_FAILURE() << "accepted: " << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError) << line;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
  }
}

TEST(Outcome, Names) {
  EXPECT_EQ(Outcome::completed().to_string(), "completed");
  EXPECT_EQ(Outcome::rejected_by(Role::Sed, ErrorCode::Replay).to_string(), "rejected-by(sed, replay)");
  EXPECT_EQ((Outcome{Outcome::Kind::Incomplete, Role::Sed, std::nullopt}).to_string(), "incomplete");
}

TEST(Scenario, HonestTopologyCompletesWithoutLeaks) {
  auto s = basic("honest");
  s.topology.plan = {"auth bms", "auth cu", "cert bms", "cert cu", "session cu bms"};
  const auto r = run_scenario(s, 3);
  EXPECT_TRUE(r.passed()) << r.observed.to_string() << " " << r.detail;
  EXPECT_TRUE(r.leak_check_passed);
  EXPECT_FALSE(r.transcript.empty());
}

TEST(Scenario, DeterministicPerSeed) {
  const auto s = basic("det", "1 down AuthConfig tamper random");
  const auto a = run_scenario(s, 11);
  const auto b = run_scenario(s, 11);
  const auto c = run_scenario(s, 12);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.observed, b.observed);
  EXPECT_NE(a.transcript, c.transcript);
}

TEST(Scenario, TamperedConfigRejectedByDevice) {
  const auto r = run_scenario(basic("t", "1 down AuthConfig tamper 40 01",
                                    Outcome::rejected_by(Role::Bms, ErrorCode::AuthenticationFailure)),
                              5);
  EXPECT_TRUE(r.passed()) << r.observed.to_string();
}

TEST(Scenario, DroppedChallengeIsIncomplete) {
  auto s = basic("drop", "* down AuthChallenge drop");
  s.expected.kind = Outcome::Kind::Incomplete;
  const auto r = run_scenario(s, 5);
  EXPECT_EQ(r.observed.kind, Outcome::Kind::Incomplete) << r.observed.to_string();
}

TEST(Scenario, ReplayedResponseRejectedBySed) {
  auto s = basic("replay", "2 up AuthResponse replay last", Outcome::rejected_by(Role::Sed, ErrorCode::Replay));
  s.topology.devices = {{"bms", Role::Bms, true}};
  s.topology.plan = {"auth bms", "auth bms"};
  const auto r = run_scenario(s, 6);
  EXPECT_TRUE(r.passed()) << r.observed.to_string() << " " << r.detail;
}

TEST(Scenario, InjectedGarbageDropped) {
  auto s = basic("inject", "1 up AuthHello inject 00112233");
  s.topology.devices = {{"bms", Role::Bms, true}};
  // Four bytes cannot hold a frame header.
  s.expected = Outcome::rejected_by(Role::Sed, ErrorCode::LengthMismatch);
  const auto r = run_scenario(s, 6);
  EXPECT_TRUE(r.passed()) << r.observed.to_string();
}

TEST(Scenario, DelayedFramesStillComplete) {
  auto s = basic("delay", "* up AuthResponse delay 3\n* down CertResponse delay 2");
  const auto r = run_scenario(s, 7);
  EXPECT_TRUE(r.passed()) << r.observed.to_string() << " " << r.detail;
}

TEST(Scenario, UnreachableReplayIsScriptError) {
  const auto r = run_scenario(basic("bad", "1 up AuthHello replay 999"), 8);
  EXPECT_EQ(r.observed.kind, Outcome::Kind::ScriptError);
  EXPECT_FALSE(r.detail.empty());
}

TEST(Scenario, UnfiredRuleIsScriptError) {
  const auto r = run_scenario(basic("unfired", "5 up AuthHello drop"), 8);
  EXPECT_EQ(r.observed.kind, Outcome::Kind::ScriptError);
  EXPECT_NE(r.detail.find("never fired"), std::string::npos);
}

TEST(Scenario, UnknownPlanStepIsScriptError) {
  auto s = basic("plan");
  s.topology.plan = {"dance bms"};
  EXPECT_EQ(run_scenario(s, 1).observed.kind, Outcome::Kind::ScriptError);
}

TEST(Simulation, LeakCheckFindsPlantedBytes) {
  Simulation sim(9);
  sim.add_device("bms", scenario_identity(9, "bms", Role::Bms));
  ASSERT_TRUE(sim.run_auth("bms"));
  const auto& frame = sim.transcript().front().bytes;
  ASSERT_GE(frame.size(), 24u);
  sim.plant_secret("frame-prefix", ByteView(frame).first(20));
  sim.plant_secret("short", ByteView(frame).first(8));
  const auto leaks = sim.leak_check();
  ASSERT_EQ(leaks.size(), 1u);
  EXPECT_NE(leaks.front().find("frame-prefix"), std::string::npos);
}

TEST(Simulation, TranscriptRecordsAdversaryActions) {
  Simulation sim(10);
  sim.add_device("bms", scenario_identity(10, "bms", Role::Bms));
  sim.set_script(AdversaryScript::parse("1 up AuthConfirm drop"));
  EXPECT_FALSE(sim.run_auth("bms"));
  bool saw = false;
  for (const auto& f : sim.transcript()) {
    if (f.msg_type == MsgType::AuthConfirm) {
      EXPECT_FALSE(f.delivered);
      EXPECT_EQ(f.adversary, "drop");
      saw = true;
    }
  }
  EXPECT_TRUE(saw);
  // Next attempt commits the pending keys.
  sim.set_script({});
  EXPECT_TRUE(sim.run_auth("bms"));
  EXPECT_EQ(sim.device("bms").keys().epoch, 2u);
}

TEST(Simulation, DuplicateNodeRejected) {
  Simulation sim(1);
  sim.add_device("x", scenario_identity(1, "x", Role::Bms));
  EXPECT_EQ(error_of([&] { sim.add_device("x", scenario_identity(1, "y", Role::Bms)); }), ErrorCode::ConfigError);
  EXPECT_EQ(error_of([&] { sim.device("nobody"); }), ErrorCode::ConfigError);
}

TEST(ThreatSuite, AllPassWithCountermeasures) {
  const auto reports = run_threat_suite(7);
  ASSERT_EQ(reports.size(), 7u);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    EXPECT_EQ(reports[i].threat, "T" + std::to_string(i + 1));
    EXPECT_TRUE(reports[i].passed()) << reports[i].threat << " " << reports[i].name << ": expected "
                                     << reports[i].expected.to_string() << ", observed "
                                     << reports[i].observed.to_string() << " " << reports[i].detail;
  }
}

TEST(ThreatSuite, RatchetOffFailsExactlyT5) {
  const auto reports = run_threat_suite(7, ThreatSuiteOptions{false});
  ASSERT_EQ(reports.size(), 7u);
  for (const auto& r : reports) EXPECT_EQ(r.passed(), r.threat != "T5") << r.threat;
}

TEST(ThreatSuite, StableAcrossSeeds) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    for (const auto& r : run_threat_suite(seed)) EXPECT_TRUE(r.passed()) << "seed " << seed << " " << r.threat;
  }
}

TEST(Bench, RejectsTooFewRuns) {
  EXPECT_EQ(error_of([] { bench_flows(29, BenchTransport::InMemory); }), ErrorCode::InvalidParameter);
}

TEST(Bench, ReportShape) {
  const auto rep = bench_flows(kMinBenchRuns, BenchTransport::InMemory);
  ASSERT_EQ(rep.rows.size(), 9u);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.runs, kMinBenchRuns);
    EXPECT_GT(row.mean_ms, 0.0);
    EXPECT_GE(row.stddev_ms, 0.0);
  }
  EXPECT_EQ(rep.row(kStep11).role, Role::Bms);
  EXPECT_EQ(rep.row(kStep22).role, Role::Sed);
  EXPECT_EQ(error_of([&] { rep.row("9.9 nothing"); }), ErrorCode::InvalidParameter);
  const auto csv = rep.to_csv();
  EXPECT_EQ(csv.rfind("step,node,runs,mean_ms,stddev_ms\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_NE(rep.to_table().find(std::string(kStep23)), std::string::npos);
}

}  // namespace
}  // namespace bmsauth::harness
