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
#include <vector>

#include "bmsauth/simulator.hpp"

namespace bmsauth::harness {

struct ThreatSuiteOptions {
  /// Off reproduces the updates-neglect residual risk.
  bool ratchet_enabled = true;
};

/// T1 malicious config injection, T2 eavesdrop, T3 unconfigured device probe,
/// T4 node capture (captured-frame replay), T5 previous key exposure,
/// T6 credential splice, T7 counterfeit device. Failures are reported, not thrown.
std::vector<ScenarioReport> run_threat_suite(std::uint64_t seed, ThreatSuiteOptions options = {});

}  // namespace bmsauth::harness
