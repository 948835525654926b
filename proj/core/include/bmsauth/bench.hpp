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
#include <string>
#include <string_view>
#include <vector>

#include "bmsauth/roles.hpp"

namespace bmsauth::harness {

enum class BenchTransport { InMemory, LoopbackTcp };

/// Step names of the per-process timing tables, in reporting order.
inline constexpr std::string_view kStep11 = "1.1 Prepare req. to SED";
inline constexpr std::string_view kStep12 = "1.2 Handle req. from BMS";
inline constexpr std::string_view kStep13 = "1.3 Handle chg. & reply";
inline constexpr std::string_view kStep14 = "1.4 Verify resp. from BMS";
inline constexpr std::string_view kStep15 = "1.5 Config. & key update";
inline constexpr std::string_view kStep21 = "2.1 Prepare cert. req.";
inline constexpr std::string_view kStep22 = "2.2 Handle req. & cert.";
inline constexpr std::string_view kStep23 = "2.3 Pub. key calculation";
inline constexpr std::string_view kStep24 = "2.4 Receive config. Ack";

inline constexpr std::size_t kMinBenchRuns = 30;

struct StepTiming {
  std::string step;
  roles::Role role = roles::Role::Bms;
  double mean_ms = 0;
  double stddev_ms = 0;  // sample standard deviation (n - 1)
  std::size_t runs = 0;
};

struct TimingReport {
  BenchTransport transport = BenchTransport::InMemory;
  std::vector<StepTiming> rows;

  /// Throws Error(InvalidParameter) for an unknown step.
  const StepTiming& row(std::string_view step) const;
  /// Aligned text table, BMS rows then SED rows.
  std::string to_table() const;
  std::string to_csv() const;
};

/// Runs `runs` full authentication + certification cycles and times each step.
/// A step spans taking a received frame off the transport, handling it, and
/// writing the response. Both endpoints run on the calling thread.
/// Throws Error(InvalidParameter) when runs < kMinBenchRuns.
TimingReport bench_flows(std::size_t runs, BenchTransport transport, std::uint64_t seed = 1);

}  // namespace bmsauth::harness
