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

#include "cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "bmsauth/bench.hpp"
#include "bmsauth/cert_codec.hpp"
#include "bmsauth/device.hpp"
#include "bmsauth/ledger.hpp"
#include "bmsauth/sed.hpp"
#include "bmsauth/session.hpp"
#include "bmsauth/threat_suite.hpp"
#include "bmsauth/transport.hpp"
#include "cli/files.hpp"

namespace bmsauth::cli {

using roles::Role;

namespace {

std::unique_ptr<EntropySource> make_rng(const std::optional<std::uint64_t>& seed, const std::string& label) {
  if (seed) return std::make_unique<SeededEntropy>(*seed, label);
  return std::make_unique<SystemEntropy>();
}

int report_error(const Error& e, std::ostream& err) {
  err << "error: " << to_string(e.code());
  if (e.offset()) err << " at offset " << *e.offset();
  err << ": " << e.what() << "\n";
  return exit_code_for(e.code());
}

std::string utc(std::uint64_t t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_event(std::ostream& err, const roles::Event& e) {
  err << "[" << roles::to_string(e.role) << "] " << roles::to_string(e.kind);
  if (e.error) err << " " << to_string(*e.error);
  if (!e.device.is_zero()) err << " device=" << to_hex(e.device.view());
  if (!e.detail.empty()) err << " (" << e.detail << ")";
  err << "\n";
}

Bytes read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Key32 encode_ca_private(const ec::Scalar& s) { return Key32(ec::mpz_to_bytes(s.value(), 32)); }

ec::Scalar decode_ca_private(const roles::CaIdentity& ca) {
  const auto& curve = ec::curve_by_id(ca.algorithm_id);
  ec::Scalar s(curve, ec::mpz_from_bytes(ca.ca_private.view()));
  if (s.is_zero()) throw Error(ErrorCode::ConfigError, "ledger CA key is zero");
  return s;
}

// ---------------------------------------------------------------------------------------------
// run: SED

int run_sed(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  if (!opts.ledger) throw Error(ErrorCode::ConfigError, "--ledger is required for the sed role");
  if (!opts.listen) throw Error(ErrorCode::ConfigError, "--listen is required for the sed role");
  const roles::LedgerFile file = roles::read_ledger_file(*opts.ledger);
  if (!file.ca) throw Error(ErrorCode::ConfigError, opts.ledger->string() + " has no CA identity record");
  const roles::CaIdentity& ca = *file.ca;
  if (opts.curve && curve_from_name(*opts.curve) != ca.algorithm_id) {
    throw Error(ErrorCode::ConfigError, "--curve differs from the ledger's algorithm " + curve_name(ca.algorithm_id));
  }
  if (opts.id && DeviceId::from(from_hex(*opts.id)) != ca.sed_id) {
    throw Error(ErrorCode::ConfigError, "--id differs from the ledger's SED id");
  }
  roles::SedLedger ledger = roles::replay_ledger(file);
  std::size_t certified = 0;
  for (const auto& [id, rec] : ledger.records()) certified += rec.status == roles::DeviceStatus::Certified ? 1 : 0;

  roles::SedConfig cfg;
  cfg.sed_id = ca.sed_id;
  cfg.algorithm_id = ca.algorithm_id;
  cfg.ratchet_enabled = !opts.no_ratchet;
  auto rng = make_rng(opts.seed, "sed");
  roles::SedNode sed(cfg, decode_ca_private(ca), std::move(ledger), *rng, roles::system_clock());

  std::mutex mu;  // guards sed, the ledger file and err
  const std::filesystem::path ledger_path = *opts.ledger;
  sed.set_event_sink([&](const roles::Event& e) { print_event(err, e); });
  sed.set_record_sink([&](const roles::LedgerRecord& r) { roles::append_ledger_records(ledger_path, {r}); });

  net::TcpListener listener(net::Address::parse(*opts.listen));
  const net::Address bound{net::Address::parse(*opts.listen).host, listener.port()};
  out << "sed " << to_hex(ca.sed_id.view()) << " curve=" << curve_name(ca.algorithm_id)
      << " devices=" << sed.ledger().records().size() << " certified=" << certified << "\n";
  out << "listening " << bound.to_string() << std::endl;

  auto serve = [&](net::TcpStream stream) {
    stream.set_read_timeout(opts.timeout_ms);
    for (;;) {
      Bytes frame;
      try {
        frame = stream.read_frame();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::IoError) {
          std::lock_guard lock(mu);
          err << "[sed] dropped connection: " << to_string(e.code()) << "\n";
        }
        return;
      }
      std::vector<Bytes> replies;
      bool rejected = false;
      {
        std::lock_guard lock(mu);
        sed.clear_events();
        replies = sed.on_frame(frame);
        for (const auto& e : sed.events()) {
          rejected = rejected || e.kind == roles::EventKind::Rejected || e.kind == roles::EventKind::Dropped;
        }
        sed.clear_events();
      }
      try {
        for (const auto& r : replies) stream.write_frame(r);
      } catch (const Error&) {
        return;
      }
      // A failed flow ends the connection; the peer sees the close instead of an oracle.
      if (rejected) return;
    }
  };

  std::vector<std::thread> workers;
  for (std::size_t served = 0; opts.exit_after == 0 || served < opts.exit_after; ++served) {
    net::TcpStream s = listener.accept();
    workers.emplace_back(serve, std::move(s));
  }
  for (auto& t : workers) t.join();
  out << "served " << workers.size() << " connections\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------------------------
// run: BMS / control unit

struct FlowFailure {
  ErrorCode code;
  std::string what;
};

std::optional<ErrorCode> last_rejection(const roles::DeviceNode& dev, std::size_t since) {
  const auto& ev = dev.events();
  for (std::size_t i = since; i < ev.size(); ++i) {
    if ((ev[i].kind == roles::EventKind::Rejected || ev[i].kind == roles::EventKind::Dropped) && ev[i].error) {
      return ev[i].error;
    }
  }
  return std::nullopt;
}

int run_device(const RunOptions& opts, Role role, std::ostream& out, std::ostream& err) {
  if (!opts.secret_file) throw Error(ErrorCode::ConfigError, "--secret-file is required");
  if (!opts.connect) throw Error(ErrorCode::ConfigError, "--connect (SED address) is required");
  if (role == Role::Bms && opts.peer) throw Error(ErrorCode::ConfigError, "--peer is for the cu role");
  const roles::DeviceIdentity identity = read_secret_file(*opts.secret_file, err);
  if (identity.role != role) {
    throw Error(ErrorCode::ConfigError, "secret file is for role " + std::string(roles::to_string(identity.role)));
  }
  if (opts.id && DeviceId::from(from_hex(*opts.id)) != identity.device_id) {
    throw Error(ErrorCode::ConfigError, "--id differs from the secret file");
  }
  const auto state_path = state_path_for(*opts.secret_file);
  const auto keys = read_device_state(state_path).value_or(crypto::provision_keys(identity.fabrication_secret));
  const std::string name(roles::to_string(role));
  const std::string dev_hex = to_hex(identity.device_id.view());

  auto rng = make_rng(opts.seed, name + ":" + dev_hex);
  roles::DeviceNode dev(identity, keys, *rng, roles::system_clock());
  dev.set_ratchet_enabled(!opts.no_ratchet);
  dev.set_event_sink([&](const roles::Event& e) {
    if (e.kind != roles::EventKind::Configured && e.kind != roles::EventKind::Certified) print_event(err, e);
  });

  auto fail = [&](ErrorCode code, const std::string& what) {
    err << "error: " << to_string(code) << ": " << what << "\n";
    return exit_code_for(code);
  };

  net::TcpStream sed = net::TcpStream::connect(net::Address::parse(*opts.connect), opts.timeout_ms);
  sed.set_read_timeout(opts.timeout_ms);

  // Device authentication.
  sed.write_frame(dev.start_auth());
  while (dev.state() == roles::DeviceState::AwaitChallenge || dev.state() == roles::DeviceState::AwaitConfig) {
    Bytes frame;
    try {
      frame = sed.read_frame();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IoError) throw;
      // The SED answers failed verification by closing the connection.
      return fail(ErrorCode::AuthenticationFailure, "SED ended the flow before configuring this device");
    }
    const std::size_t mark = dev.events().size();
    auto reply = dev.on_frame(frame);
    if (auto code = last_rejection(dev, mark)) return fail(*code, "device authentication aborted");
    if (dev.state() == roles::DeviceState::Configured) write_device_state(state_path, dev.keys());
    if (reply) sed.write_frame(*reply);
  }
  out << name << " " << dev_hex << " authenticated epoch=" << dev.keys().epoch
      << " session=" << to_hex(dev.config()->session_id.view()) << std::endl;

  // Certificate derivation.
  sed.write_frame(dev.start_cert());
  {
    Bytes frame;
    try {
      frame = sed.read_frame();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IoError) throw;
      return fail(ErrorCode::CertificationFailed, "SED ended the flow before issuing a certificate");
    }
    const std::size_t mark = dev.events().size();
    auto ack = dev.on_frame(frame);
    if (!ack) return fail(last_rejection(dev, mark).value_or(ErrorCode::CertificationFailed), "certification aborted");
    sed.write_frame(*ack);
  }
  sed.close();
  const roles::Credentials& creds = *dev.credentials();
  const auto dec = cert::decode(creds.cert);
  out << name << " " << dev_hex << " certified cert=" << fingerprint(creds.cert.view())
      << " valid_to=" << utc(dec.meta.valid_to) << std::endl;

  if (role == Role::Bms && opts.listen) {
    net::TcpListener listener(net::Address::parse(*opts.listen));
    out << "listening " << net::Address{net::Address::parse(*opts.listen).host, listener.port()}.to_string()
        << std::endl;
    net::TcpStream peer = listener.accept(opts.timeout_ms);
    peer.set_read_timeout(opts.timeout_ms);
    roles::SessionResponder resp(creds, *rng, roles::system_clock());
    while (!resp.context().established()) {
      auto reply = resp.on_frame(peer.read_frame());
      if (resp.failure()) return fail(*resp.failure(), "session establishment failed");
      if (reply) peer.write_frame(*reply);
    }
    const Key32& k_s = resp.context().session_key();
    out << "session peer=" << to_hex(resp.context().peer_id.view()) << " key-fingerprint=" << fingerprint(k_s.view())
        << std::endl;
    roles::AppChannel channel(k_s, false);
    const Bytes msg = channel.open(peer.read_record());
    out << "message: " << std::string(msg.begin(), msg.end()) << std::endl;
  }
  if (role == Role::ControlUnit && opts.peer) {
    net::TcpStream peer = net::TcpStream::connect(net::Address::parse(*opts.peer), opts.timeout_ms);
    peer.set_read_timeout(opts.timeout_ms);
    roles::SessionInitiator init(creds, *rng, roles::system_clock());
    peer.write_frame(init.hello());
    while (!init.context().established()) {
      auto reply = init.on_frame(peer.read_frame());
      if (init.failure()) return fail(*init.failure(), "session establishment failed");
      if (reply) peer.write_frame(*reply);
    }
    const Key32& k_s = init.context().session_key();
    out << "session peer=" << to_hex(init.context().peer_id.view()) << " key-fingerprint=" << fingerprint(k_s.view())
        << std::endl;
    roles::AppChannel channel(k_s, true);
    peer.write_record(channel.seal(ByteView(reinterpret_cast<const std::uint8_t*>(opts.message.data()),
                                            opts.message.size()),
                                   *rng));
    out << "sent sealed message (" << opts.message.size() << " bytes)" << std::endl;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------------------------
// inspect

void print_cert(std::ostream& out, const cert::EncodedCertificate& c) {
  const auto dec = cert::decode(c);
  out << "certificate " << c.size() << " bytes, fingerprint " << fingerprint(c.view()) << "\n";
  out << "  version      " << static_cast<int>(c.bytes()[0]) << "\n";
  out << "  algorithm    0x" << to_hex(ByteView(&c.bytes()[1], 1)) << " (" << curve_name(dec.meta.algorithm_id)
      << ")\n";
  out << "  session_id   " << to_hex(dec.session_id.view()) << "\n";
  out << "  issuer       " << to_hex(dec.meta.issuer_id.view()) << "\n";
  out << "  subject      " << to_hex(dec.meta.subject_id.view()) << "\n";
  out << "  valid_from   " << dec.meta.valid_from << " (" << utc(dec.meta.valid_from) << ")\n";
  out << "  valid_to     " << dec.meta.valid_to << " (" << utc(dec.meta.valid_to) << ")\n";
  if (dec.reconstruction_point.is_identity()) {
    out << "  point U      identity\n";
  } else {
    const auto w = dec.reconstruction_point.curve().element_bytes();
    out << "  point U.x    " << to_hex(ec::mpz_to_bytes(dec.reconstruction_point.x(), w)) << "\n";
    out << "  point U.y    " << to_hex(ec::mpz_to_bytes(dec.reconstruction_point.y(), w)) << "\n";
  }
}

std::string describe_record(const roles::LedgerRecord& r) {
  using roles::RecordField;
  std::string s(roles::to_string(r.kind));
  for (const auto& [f, v] : r.fields) {
    switch (f) {
      case RecordField::DeviceId:
        s += " device=" + to_hex(v);
        break;
      case RecordField::Role:
        s += " role=" + (v.size() == 1 && v[0] <= 2 ? std::string(roles::to_string(static_cast<Role>(v[0]))) : "?");
        break;
      case RecordField::Secret:
        s += " secret=<redacted fp:" + fingerprint(v) + ">";
        break;
      case RecordField::SessionId:
        s += " session=" + to_hex(v);
        break;
      case RecordField::Nonce:
        s += " ratchet_nonce=" + to_hex(v);
        break;
      case RecordField::Certificate:
        s += " cert=" + fingerprint(v);
        break;
      case RecordField::Trigger:
        s += " trigger=" + (v.size() == 1 && v[0] <= 4
                                ? std::string(roles::to_string(static_cast<roles::RecertTrigger>(v[0])))
                                : std::string("?"));
        break;
      case RecordField::AlgorithmId:
        s += " algorithm=" + (v.size() == 1 ? curve_name(v[0]) : std::string("?"));
        break;
      case RecordField::SedId:
        s += " sed=" + to_hex(v);
        break;
    }
  }
  return s;
}

int inspect_ledger(const Bytes& data, std::ostream& out) {
  const roles::LedgerFile file = roles::parse_ledger(data);
  out << "ledger version " << static_cast<int>(roles::kLedgerVersion) << ", " << file.records.size()
      << " records\n";
  for (std::size_t i = 0; i < file.records.size(); ++i) out << "  " << i << " " << describe_record(file.records[i]) << "\n";
  const roles::SedLedger ledger = roles::replay_ledger(file);
  out << "devices:\n";
  for (const auto& [id, rec] : ledger.records()) {
    out << "  " << to_hex(id.view()) << " " << roles::to_string(rec.role) << " " << roles::to_string(rec.status)
        << " epoch=" << rec.keys.epoch;
    if (rec.cert) out << " cert=" << fingerprint(rec.cert->view());
    out << "\n";
  }
  return kExitOk;
}

bool looks_textual(const Bytes& data) {
  for (auto b : data) {
    if (b != '\n' && b != '\r' && b != '\t' && (b < 0x20 || b > 0x7E)) return false;
  }
  return true;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return kExitIo;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::EntropyFailure:
      return kExitConfig;
    default:
      return kExitProtocol;
  }
}

std::uint8_t curve_from_name(const std::string& name) {
  if (name == "p256") return ec::kP256Sha256;
  if (name == "toy") return ec::kToyF17Sha256;
  throw Error(ErrorCode::ConfigError, "unknown curve '" + name + "' (expected p256 or toy)");
}

std::string curve_name(std::uint8_t algorithm_id) {
  if (algorithm_id == ec::kP256Sha256) return "p256";
  if (algorithm_id == ec::kToyF17Sha256) return "toy";
  return "unknown";
}

int cmd_provision(const ProvisionOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.devices.empty()) throw Error(ErrorCode::ConfigError, "name at least one device");
    const auto& curve = ec::curve_by_id(curve_from_name(opts.curve));
    auto rng = make_rng(opts.seed, "provision");

    std::vector<roles::DeviceIdentity> ids;
    std::set<DeviceId> seen;
    for (const auto& spec : opts.devices) {
      const auto colon = spec.find(':');
      const std::string hex = spec.substr(0, colon);
      roles::DeviceIdentity id;
      try {
        id.device_id = DeviceId::from(from_hex(hex));
      } catch (const Error&) {
        throw Error(ErrorCode::ConfigError, "device id '" + hex + "' must be 16 hex digits");
      }
      id.role = Role::Bms;
      if (colon != std::string::npos) {
        const auto r = roles::role_from_string(spec.substr(colon + 1));
        if (!r || *r == Role::Sed) throw Error(ErrorCode::ConfigError, "device role must be bms or cu in '" + spec + "'");
        id.role = *r;
      }
      if (!seen.insert(id.device_id).second) throw Error(ErrorCode::ConfigError, "duplicate device id " + hex);
      do {
        id.fabrication_secret = Key32(rng->draw<32>().view());
      } while (id.fabrication_secret.is_zero());
      ids.push_back(std::move(id));
    }

    roles::CaIdentity ca;
    if (opts.sed_id) {
      try {
        ca.sed_id = DeviceId::from(from_hex(*opts.sed_id));
      } catch (const Error&) {
        throw Error(ErrorCode::ConfigError, "--id must be 16 hex digits");
      }
    } else {
      ca.sed_id = rng->draw<8>();
    }
    ca.algorithm_id = curve.algorithm_id();
    ca.ca_private = encode_ca_private(ec::random_scalar(curve, *rng));

    std::filesystem::create_directories(opts.out_dir);
    const auto ledger_path = opts.out_dir / "sed.ledger";
    std::vector<std::filesystem::path> paths;
    for (const auto& id : ids) paths.push_back(opts.out_dir / (to_hex(id.device_id.view()) + ".secret"));
    if (!opts.force) {
      for (const auto& p : paths) {
        if (std::filesystem::exists(p)) throw Error(ErrorCode::ConfigError, p.string() + " exists; pass --force");
      }
      if (std::filesystem::exists(ledger_path)) {
        throw Error(ErrorCode::ConfigError, ledger_path.string() + " exists; pass --force");
      }
    }

    Bytes ledger = roles::encode_ledger_header();
    append(ledger, roles::encode_record(roles::make_ca_record(ca)));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      write_private_file(paths[i], format_secret_file(ids[i]), opts.force);
      std::filesystem::remove(state_path_for(paths[i]));
      append(ledger, roles::encode_record(roles::make_provisioned_record(ids[i])));
    }
    write_private_file(ledger_path, std::string(ledger.begin(), ledger.end()), opts.force);

    out << "sed " << to_hex(ca.sed_id.view()) << " curve=" << curve_name(ca.algorithm_id) << " ledger=" << ledger_path.string()
        << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out << "device " << to_hex(ids[i].device_id.view()) << " role=" << roles::to_string(ids[i].role)
          << " secret-file=" << paths[i].string() << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io-error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto role = roles::role_from_string(opts.role);
    if (!role) throw Error(ErrorCode::ConfigError, "--role must be sed, bms or cu");
    if (*role == Role::Sed) return run_sed(opts, out, err);
    return run_device(opts, *role, out, err);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io-error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_inspect(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  try {
    const Bytes data = read_binary(path);
    if (data.size() >= 4 && data[0] == 'B' && data[1] == 'M' && data[2] == 'S' && data[3] == 'L') {
      return inspect_ledger(data, out);
    }
    if (!looks_textual(data)) {
      print_cert(out, cert::EncodedCertificate::from_bytes(data));
      return kExitOk;
    }
    const std::string text(data.begin(), data.end());
    if (text.find("secret=") != std::string::npos) {
      const auto id = parse_secret_file(text);
      out << "secret file device=" << to_hex(id.device_id.view()) << " role=" << roles::to_string(id.role)
          << " secret=<redacted fp:" << fingerprint(id.fabrication_secret.view()) << ">\n";
      return kExitOk;
    }
    // Hex certificates, one per blank-line separated block; '#' comments.
    std::size_t line_no = 0, block_line = 0, count = 0, pos = 0;
    std::string hex;
    auto flush = [&] {
      if (hex.empty()) return;
      Bytes bytes;
      try {
        bytes = from_hex(hex);
      } catch (const Error&) {
        throw Error(ErrorCode::MalformedMessage, "block at line " + std::to_string(block_line) + ": not hex");
      }
      try {
        if (count > 0) out << "\n";
        print_cert(out, cert::EncodedCertificate::from_bytes(bytes));
      } catch (const Error& e) {
        throw Error(e.code(), "block at line " + std::to_string(block_line) + ": " + e.what(), e.offset());
      }
      ++count;
      hex.clear();
    };
    while (pos < text.size()) {
      const auto nl = std::min(text.find('\n', pos), text.size());
      std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (std::all_of(line.begin(), line.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); })) {
        flush();
        continue;
      }
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      for (char ch : line) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
          if (hex.empty()) block_line = line_no;
          hex += ch;
        }
      }
    }
    flush();
    if (count == 0) throw Error(ErrorCode::LengthMismatch, "no certificate found", 0);
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int cmd_threats(std::uint64_t seed, bool no_ratchet, const std::optional<std::filesystem::path>& out_dir,
                std::ostream& out, std::ostream& err) {
  try {
    const auto reports = harness::run_threat_suite(seed, {!no_ratchet});
    std::string text, csv = "threat,scenario,expected,observed,leak_check,frames,passed\n";
    std::size_t passed = 0;
    for (const auto& r : reports) {
      passed += r.passed() ? 1 : 0;
      text += r.threat + " " + (r.passed() ? "PASS" : "FAIL") + " " + r.name + ": expected " + r.expected.to_string() +
              ", observed " + r.observed.to_string() + (r.leak_check_passed ? "" : ", LEAK") +
              (r.detail.empty() ? "" : " [" + r.detail + "]") + "\n";
      for (const auto& l : r.leaks) text += "    leak: " + l + "\n";
      csv += r.threat + ",\"" + r.name + "\",\"" + r.expected.to_string() + "\",\"" + r.observed.to_string() + "\"," +
             (r.leak_check_passed ? "pass" : "fail") + "," + std::to_string(r.transcript.size()) + "," +
             (r.passed() ? "yes" : "no") + "\n";
    }
    text += std::to_string(passed) + "/" + std::to_string(reports.size()) + " scenarios passed (seed " +
            std::to_string(seed) + (no_ratchet ? ", ratchet disabled" : "") + ")\n";
    out << text;
    if (out_dir) {
      std::filesystem::create_directories(*out_dir);
      std::ofstream(*out_dir / "threats.txt") << text;
      std::ofstream(*out_dir / "threats.csv") << csv;
    }
    return passed == reports.size() ? kExitOk : kExitProtocol;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int cmd_bench(std::size_t runs, const std::string& transport, std::uint64_t seed,
              const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err) {
  try {
    harness::BenchTransport t;
    if (transport == "memory") {
      t = harness::BenchTransport::InMemory;
    } else if (transport == "tcp") {
      t = harness::BenchTransport::LoopbackTcp;
    } else {
      throw Error(ErrorCode::ConfigError, "--transport must be memory or tcp");
    }
    if (runs < harness::kMinBenchRuns) {
      throw Error(ErrorCode::ConfigError, "--runs must be at least " + std::to_string(harness::kMinBenchRuns));
    }
    const auto report = harness::bench_flows(runs, t, seed);
    out << report.to_table();
    if (out_dir) {
      std::filesystem::create_directories(*out_dir);
      std::ofstream(*out_dir / "bench.txt") << report.to_table();
      std::ofstream(*out_dir / "bench.csv") << report.to_csv();
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

}  // namespace bmsauth::cli
