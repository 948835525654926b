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

#include "bmsauth/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "bmsauth/device.hpp"
#include "bmsauth/error.hpp"
#include "bmsauth/sed.hpp"
#include "bmsauth/simulator.hpp"
#include "bmsauth/transport.hpp"

namespace bmsauth::harness {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::pair<std::string_view, roles::Role>>& step_order() {
  static const std::vector<std::pair<std::string_view, roles::Role>> order{
      {kStep11, roles::Role::Bms}, {kStep13, roles::Role::Bms}, {kStep15, roles::Role::Bms},
      {kStep21, roles::Role::Bms}, {kStep23, roles::Role::Bms}, {kStep12, roles::Role::Sed},
      {kStep14, roles::Role::Sed}, {kStep22, roles::Role::Sed}, {kStep24, roles::Role::Sed},
  };
  return order;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Endpoints {
  std::unique_ptr<net::FrameTransport> device;
  std::unique_ptr<net::FrameTransport> sed;
};

Endpoints open_endpoints(BenchTransport transport) {
  if (transport == BenchTransport::InMemory) {
    auto [a, b] = net::memory_pipe();
    return {std::move(a), std::move(b)};
  }
  net::TcpListener listener(net::Address{"127.0.0.1", 0});
  auto client = std::make_unique<net::TcpStream>(net::TcpStream::connect({"127.0.0.1", listener.port()}));
  auto server = std::make_unique<net::TcpStream>(listener.accept(5000));
  return {std::move(client), std::move(server)};
}

}  // namespace

const StepTiming& TimingReport::row(std::string_view step) const {
  for (const auto& r : rows) {
    if (r.step == step) return r;
  }
  throw Error(ErrorCode::InvalidParameter, "no timing row '" + std::string(step) + "'");
}

std::string TimingReport::to_table() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-28s %-4s %12s %12s\n", "Step", "Node", "Mean [ms]", "Std [ms]");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-28s %-4s %12.4f %12.4f\n", r.step.c_str(),
                  r.role == roles::Role::Sed ? "SED" : "BMS", r.mean_ms, r.stddev_ms);
    out << line;
  }
  out << "runs: " << (rows.empty() ? 0 : rows.front().runs)
      << ", transport: " << (transport == BenchTransport::InMemory ? "in-memory" : "loopback-tcp") << "\n";
  return out.str();
}

std::string TimingReport::to_csv() const {
  std::ostringstream out;
  out << "step,node,runs,mean_ms,stddev_ms\n";
  for (const auto& r : rows) {
    char nums[64];
    std::snprintf(nums, sizeof nums, "%.6f,%.6f", r.mean_ms, r.stddev_ms);
    out << '"' << r.step << "\"," << (r.role == roles::Role::Sed ? "sed" : "bms") << ',' << r.runs << ',' << nums
        << '\n';
  }
  return out.str();
}

TimingReport bench_flows(std::size_t runs, BenchTransport transport, std::uint64_t seed) {
  if (runs < kMinBenchRuns) {
    throw Error(ErrorCode::InvalidParameter, "at least " + std::to_string(kMinBenchRuns) + " runs are required");
  }
  roles::SedConfig cfg = Simulation::default_sed_config();
  SeededEntropy sed_rng(seed, "bench-sed");
  SeededEntropy dev_rng(seed, "bench-bms");
  const auto identity = scenario_identity(seed, "bench-bms", roles::Role::Bms);
  roles::SedLedger ledger;
  ledger.add_device(identity);
  const auto& curve = ec::curve_by_id(cfg.algorithm_id);
  roles::SedNode sed(cfg, ec::random_scalar(curve, sed_rng), std::move(ledger), sed_rng, roles::system_clock());
  roles::DeviceNode bms(identity, dev_rng, roles::system_clock());
  Endpoints ep = open_endpoints(transport);

  std::map<std::string_view, std::vector<double>> samples;
  auto stalled = [](std::string_view step) {
    return Error(ErrorCode::UnexpectedMessage, "bench flow stalled at " + std::string(step));
  };
  // Device-side step: receive, handle, reply.
  auto bms_step = [&](std::string_view step) {
    Bytes in = ep.device->read_frame();
    const auto t0 = Clock::now();
    auto reply = bms.on_frame(in);
    if (!reply) throw stalled(step);
    ep.device->write_frame(*reply);
    samples[step].push_back(ms_since(t0));
  };
  // SED-side step; `expect_reply` is false for acknowledgements.
  auto sed_step = [&](std::string_view step, bool expect_reply) {
    Bytes in = ep.sed->read_frame();
    const auto t0 = Clock::now();
    auto replies = sed.on_frame(in);
    for (const auto& r : replies) ep.sed->write_frame(r);
    if (expect_reply != !replies.empty()) throw stalled(step);
    if (!step.empty()) samples[step].push_back(ms_since(t0));
  };

  for (std::size_t i = 0; i < runs; ++i) {
    auto t0 = Clock::now();
    ep.device->write_frame(bms.start_auth());
    samples[kStep11].push_back(ms_since(t0));
    sed_step(kStep12, true);
    bms_step(kStep13);
    sed_step(kStep14, true);
    bms_step(kStep15);
    sed_step({}, false);  // AuthConfirm

    t0 = Clock::now();
    ep.device->write_frame(bms.start_cert());
    samples[kStep21].push_back(ms_since(t0));
    sed_step(kStep22, true);
    bms_step(kStep23);
    sed_step(kStep24, false);
    if (bms.state() != roles::DeviceState::Certified) throw stalled("certification");
  }
  ep.device->close();
  ep.sed->close();

  TimingReport report;
  report.transport = transport;
  for (const auto& [step, role] : step_order()) {
    const auto& v = samples[step];
    StepTiming t;
    t.step = std::string(step);
    t.role = role;
    t.runs = v.size();
    t.mean_ms = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - t.mean_ms) * (x - t.mean_ms);
    t.stddev_ms = std::sqrt(ss / static_cast<double>(v.size() - 1));
    report.rows.push_back(std::move(t));
  }
  return report;
}

}  // namespace bmsauth::harness
