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

#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"

using namespace bmsauth::cli;

int main(int argc, char** argv) {
  CLI::App app{"bmsauth: device authentication, implicit certificates and session keys for closed BMS networks"};
  app.require_subcommand(1);

  ProvisionOptions prov;
  auto* provision = app.add_subcommand("provision", "Generate fabrication secrets and the SED ledger seed");
  provision->add_option("devices", prov.devices, "Device ids, <16 hex>[:bms|:cu]")->required();
  provision->add_option("--out", prov.out_dir, "Output directory")->required();
  provision->add_option("--id", prov.sed_id, "SED id (16 hex digits), random when omitted");
  provision->add_option("--curve", prov.curve, "p256 or toy")->capture_default_str();
  provision->add_option("--seed", prov.seed, "Deterministic secrets (testing only)");
  provision->add_flag("--force", prov.force, "Overwrite existing files");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run an SED, BMS or control-unit node over TCP");
  run_cmd->add_option("--role", run.role, "sed, bms or cu")->required();
  run_cmd->add_option("--listen", run.listen, "SED: serve address; BMS: session address after certification");
  run_cmd->add_option("--connect", run.connect, "SED address (bms, cu)");
  run_cmd->add_option("--peer", run.peer, "BMS session address (cu)");
  run_cmd->add_option("--id", run.id, "Expected device or SED id (16 hex digits)");
  run_cmd->add_option("--secret-file", run.secret_file, "Fabrication secret file (bms, cu)");
  run_cmd->add_option("--ledger", run.ledger, "Ledger file (sed)");
  run_cmd->add_option("--curve", run.curve, "Expected curve, p256 or toy (sed)");
  run_cmd->add_option("--seed", run.seed, "Deterministic randomness (testing only)");
  run_cmd->add_option("--exit-after", run.exit_after, "SED: stop after this many connections");
  run_cmd->add_option("--message", run.message, "CU: application message to send")->capture_default_str();
  run_cmd->add_option("--timeout-ms", run.timeout_ms, "Read and connect timeout")->capture_default_str();
  run_cmd->add_flag("--no-ratchet", run.no_ratchet, "Disable key ratcheting (test only)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Dump a certificate, ledger or secret file with secrets redacted");
  inspect->add_option("file", inspect_path, "File to inspect")->required();

  std::uint64_t threats_seed = 1;
  bool threats_no_ratchet = false;
  std::optional<std::filesystem::path> threats_out;
  auto* threats = app.add_subcommand("threats", "Run the T1-T7 threat scenarios");
  threats->add_option("--seed", threats_seed, "Scenario seed")->capture_default_str();
  threats->add_option("--out", threats_out, "Directory for threats.txt and threats.csv");
  threats->add_flag("--no-ratchet", threats_no_ratchet, "Disable key ratcheting (shows the T5 residual risk)");

  std::size_t bench_runs = 30;
  std::uint64_t bench_seed = 1;
  std::string bench_transport = "memory";
  std::optional<std::filesystem::path> bench_out;
  auto* bench = app.add_subcommand("bench", "Time each protocol step");
  bench->add_option("--runs", bench_runs, "Repetitions (at least 30)")->capture_default_str();
  bench->add_option("--transport", bench_transport, "memory or tcp")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Seed for protocol randomness")->capture_default_str();
  bench->add_option("--out", bench_out, "Directory for bench.txt and bench.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*provision) return cmd_provision(prov, std::cout, std::cerr);
  if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
  if (*inspect) return cmd_inspect(inspect_path, std::cout, std::cerr);
  if (*threats) return cmd_threats(threats_seed, threats_no_ratchet, threats_out, std::cout, std::cerr);
  if (*bench) return cmd_bench(bench_runs, bench_transport, bench_seed, bench_out, std::cout, std::cerr);
  return kExitConfig;
}
