// lrsha: ceremony, signing, precompute, verification, audit, demo and bench.
//
// Exit codes: 0 success/accept, 1 reject or command failure, 2 infrastructure
// error during verify/audit.

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "lrsha/cli.hpp"
#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"

namespace {

using namespace lrsha;
namespace fs = std::filesystem;

constexpr fs::perms kPublicFile =
    fs::perms::owner_read | fs::perms::owner_write | fs::perms::group_read | fs::perms::others_read;

std::optional<std::string> opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

Bytes read_input(const std::string& path) {
  if (path == "-") {
    std::string all((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return Bytes(all.begin(), all.end());
  }
  return read_file(path);
}

vclient::DeploymentDescriptor load_descriptor(const std::string& path) {
  Bytes b = read_file(path);
  return vclient::DeploymentDescriptor::from_json(std::string(b.begin(), b.end()));
}

fs::path self_dir() {
  std::error_code ec;
  fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  return ec ? fs::current_path() : exe.parent_path();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LRSHA / FLRSHA signing tools"};
  app.require_subcommand(1);

  // ceremony
  auto* cer = app.add_subcommand("ceremony", "Generate signer key, server secrets and descriptor");
  std::string c_scheme = "lrsha", c_group = "ristretto255", c_out, c_seal;
  std::uint32_t c_servers = 3;
  std::uint64_t c_max = kDefaultMaxSignatures;
  std::vector<std::string> c_addr;
  std::optional<std::uint64_t> c_seed;
  cer->add_option("--scheme", c_scheme)->capture_default_str();
  cer->add_option("--group", c_group)->capture_default_str();
  cer->add_option("--servers,-L", c_servers)->capture_default_str();
  cer->add_option("--max-epoch,-J", c_max)->capture_default_str();
  cer->add_option("--out", c_out, "Empty output directory")->required();
  cer->add_option("--address", c_addr, "Server address, once per server");
  cer->add_option("--seed", c_seed, "Deterministic keys (testing only)");
  cer->add_option("--seal-key", c_seal, "Hex seal key for the signer key file")->envname("LRSHA_SEAL_KEY");

  // sign
  auto* sgn = app.add_subcommand("sign", "Sign a message and advance the key");
  std::string s_key, s_seal, s_msg = "-", s_out, s_pre;
  sgn->add_option("--key", s_key)->required();
  sgn->add_option("--seal-key", s_seal)->envname("LRSHA_SEAL_KEY");
  sgn->add_option("--message,-m", s_msg, "Message file, - for stdin")->capture_default_str();
  sgn->add_option("--out,-o", s_out, "Signature file (default: hex on stdout)");
  sgn->add_option("--precomputed", s_pre, "Precompute store");

  // precompute
  auto* pre = app.add_subcommand("precompute", "Build a precompute store for the next epochs");
  std::string p_key, p_seal, p_out;
  std::uint64_t p_count = 2048;
  std::optional<std::uint64_t> p_water;
  bool p_serial = false;
  pre->add_option("--key", p_key)->required();
  pre->add_option("--seal-key", p_seal)->envname("LRSHA_SEAL_KEY");
  pre->add_option("--out", p_out)->required();
  pre->add_option("--count", p_count)->capture_default_str();
  pre->add_option("--watermark", p_water, "Replenish below this many entries (default count/8)");
  pre->add_flag("--serial", p_serial, "Use the serial kernels");

  // verify
  auto* ver = app.add_subcommand("verify", "Verify a signature against the deployment");
  std::string v_desc, v_msg, v_sig, v_format = "text";
  bool v_strict = false;
  int v_timeout_ms = 10000;
  ver->add_option("--descriptor,-d", v_desc)->required();
  ver->add_option("--message,-m", v_msg, "Message file, - for stdin")->required();
  ver->add_option("--signature,-s", v_sig)->required();
  ver->add_option("--format", v_format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  ver->add_flag("--strict", v_strict, "Require strictly increasing epochs");
  ver->add_option("--timeout-ms", v_timeout_ms)->capture_default_str();

  // audit
  auto* aud = app.add_subcommand("audit", "Check every server's certificates on sample epochs");
  std::string a_desc, a_format = "text";
  std::vector<std::uint64_t> a_epochs;
  aud->add_option("--descriptor,-d", a_desc)->required();
  aud->add_option("--epochs", a_epochs, "Epochs to check")->delimiter(',')->required();
  aud->add_option("--format", a_format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  // demo
  auto* dem = app.add_subcommand("demo", "Run a local deployment end to end");
  cli::DemoOptions d;
  std::string d_scheme = "lrsha", d_bin, d_work;
  dem->add_option("--scheme", d_scheme)->capture_default_str();
  dem->add_option("--servers,-L", d.servers)->capture_default_str();
  dem->add_option("--max-epoch,-J", d.max_epoch)->capture_default_str();
  dem->add_option("--messages", d.messages, "Messages to sign (default: J)");
  dem->add_option("--seed", d.seed, "Deterministic keys and transcript");
  dem->add_option("--tamper-server", d.tamper_server)->capture_default_str();
  dem->add_option("--fault", d.fault)->capture_default_str();
  dem->add_option("--server-bin", d_bin, "comc-server executable (default: next to this one)");
  dem->add_option("--workdir", d_work, "Keep files here instead of a temp dir");

  // bench
  auto* ben = app.add_subcommand("bench", "Micro-benchmarks against a Schnorr baseline");
  cli::BenchOptions b;
  std::string b_group = "ristretto255", b_json, b_md;
  std::vector<std::string> b_schemes;
  ben->add_option("--iterations,-n", b.iterations)->capture_default_str();
  ben->add_option("--servers,-L", b.servers)->capture_default_str();
  ben->add_option("--group", b_group)->capture_default_str();
  ben->add_option("--scheme", b_schemes, "Repeatable; default both");
  ben->add_option("--json", b_json, "Write the JSON report here");
  ben->add_option("--markdown", b_md, "Write the Markdown table here");

  CLI11_PARSE(app, argc, argv);

  try {
    init_crypto();
    if (*cer) {
      cli::CeremonyOptions o;
      o.scheme = parse_scheme(c_scheme);
      o.group = parse_group_id(c_group);
      o.servers = c_servers;
      o.max_epoch = c_max;
      o.out = c_out;
      o.addresses = c_addr;
      o.seed = c_seed;
      o.seal_key = opt(c_seal);
      cli::CeremonyFiles f = cli::ceremony(o);
      std::cout << f.signer_key.string() << "\n";
      for (const auto& p : f.server_secrets) std::cout << p.string() << "\n";
      std::cout << f.descriptor.string() << "\n";
      return 0;
    }
    if (*sgn) {
      cli::SignOptions o;
      o.key = s_key;
      o.seal_key = opt(s_seal);
      if (!s_pre.empty()) o.precomputed = fs::path(s_pre);
      Bytes msg = read_input(s_msg);
      cli::SignResult r = cli::sign_message(o, msg);
      crash_point("sign:before-output");
      Bytes sig = r.signature.encode();
      if (s_out.empty()) {
        std::cout << to_hex(sig) << "\n";
      } else {
        atomic_write_file(s_out, sig);
      }
      if (r.replenish) std::cerr << "precompute store is below its watermark\n";
      return 0;
    }
    if (*pre) {
      cli::PrecomputeOptions o;
      o.key = p_key;
      o.seal_key = opt(p_seal);
      o.out = p_out;
      o.count = p_count;
      o.watermark = p_water;
      o.exec = p_serial ? kernels::Exec::serial : kernels::Exec::parallel;
      cli::PrecomputeStats st = cli::precompute_store(o);
      std::cout << "entries " << st.entries << " from epoch " << st.first << ", " << st.entry_bytes
                << " bytes each, " << st.store_bytes << " bytes total\n";
      return 0;
    }
    if (*ver) {
      cli::VerifyOutcome out;
      try {
        auto desc = load_descriptor(v_desc);
        vclient::ClientOptions co;
        co.strict_increasing = v_strict;
        vclient::Client client(
            desc, std::make_shared<vclient::HttpTransport>(desc, std::chrono::milliseconds(v_timeout_ms)), co);
        Bytes msg = read_input(v_msg);
        Bytes sig = read_file(v_sig);
        out = cli::verify_signature(client, msg, sig);
      } catch (const Error& e) {
        out.outcome = cli::Outcome::error;
        out.reason = e.tag();
      }
      std::cout << cli::format_outcome(out, v_format == "json") << std::endl;
      return static_cast<int>(out.outcome);
    }
    if (*aud) {
      try {
        auto desc = load_descriptor(a_desc);
        vclient::Client client(desc, std::make_shared<vclient::HttpTransport>(desc));
        vclient::AuditReport r = client.audit_servers(a_epochs);
        std::cout << cli::format_audit(r, a_format == "json");
        if (a_format == "json") std::cout << "\n";
        return r.all_pass() ? 0 : 1;
      } catch (const Error& e) {
        std::cout << "error " << e.tag() << std::endl;
        return 2;
      }
    }
    if (*dem) {
      d.scheme = parse_scheme(d_scheme);
      d.server_bin = d_bin.empty() ? self_dir() / "comc-server" : fs::path(d_bin);
      if (!d_work.empty()) d.workdir = fs::path(d_work);
      return cli::run_demo(d, std::cout);
    }
    if (*ben) {
      b.group = parse_group_id(b_group);
      if (!b_schemes.empty()) {
        b.schemes.clear();
        for (const auto& s : b_schemes) b.schemes.push_back(parse_scheme(s));
      }
      cli::BenchReport r = cli::run_bench(b);
      std::cout << r.to_markdown();
      if (!b_json.empty()) atomic_write_file(b_json, as_bytes(r.to_json()), kPublicFile);
      if (!b_md.empty()) atomic_write_file(b_md, as_bytes(r.to_markdown()), kPublicFile);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error " << e.tag() << ": " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
